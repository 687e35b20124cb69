#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace pc {

using Vector = std::vector<double>;

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  const double* data() const { return values.data(); }
  double* data() { return values.data(); }

  bool operator==(const Matrix&) const = default;
};

// Gradients keyed by parameter name; shapes mirror the parameters.
using GradStore = std::map<std::string, Vector>;

// Named view of one flat parameter array inside a model.
struct ParamRef {
  std::string name;
  Vector* values;
};

// y = W x + b. Throws std::invalid_argument on dimension mismatch.
Vector linear_forward(const Matrix& W, const Vector& b, const Vector& x);

// Throws pc::NumericError if any entry is NaN/Inf; `what` names the value.
void check_finite(const Vector& v, const std::string& what);
void check_finite(double v, const std::string& what);

}  // namespace pc
