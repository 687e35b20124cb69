#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace pc {

// Deterministic PRNG wrapper. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard, so identical seeds give identical
// streams on every platform. Variate derivation is done by hand below
// because the standard <random> distributions are not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 bits of precision.
  double uniform() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0, n). Modulo bias is negligible for the small n used here
  // and keeps the draw count per call fixed at one.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  // Derive an independent stream, e.g. for per-image sampling.
  Rng fork() { return Rng(engine_()); }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a 64-bit hash, used for embedding buckets and for seeding the
// synthetic grounder deterministically from strings.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// splitmix64 step; fine for hash-derived value streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double splitmix_uniform(std::uint64_t& state) {
  return std::ldexp(static_cast<double>(splitmix64(state) >> 11), -53);
}

}  // namespace pc
