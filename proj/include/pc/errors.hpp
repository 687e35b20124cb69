#pragma once

#include <stdexcept>
#include <string>

namespace pc {

// Configuration / validation problems. CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data problems: parse failures, referential integrity, missing records.
// CLI exit code 3.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : DataError {
  explicit FormatError(const std::string& msg) : DataError(msg) {}
  FormatError(const std::string& file, std::size_t line, const std::string& msg)
      : DataError(file + ":" + std::to_string(line) + ": " + msg) {}
};

struct MissingGroundingError : DataError {
  explicit MissingGroundingError(const std::string& msg) : DataError(msg) {}
};

struct NotFlippableError : DataError {
  explicit NotFlippableError(const std::string& msg) : DataError(msg) {}
};

// NaN/Inf detected where a finite value is required. CLI exit code 4.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation invoked out of sequence (e.g. backward before forward).
struct StateError : std::logic_error {
  explicit StateError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace pc
