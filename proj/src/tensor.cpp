#include "pc/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "pc/errors.hpp"
#include "pc/kernels.hpp"

namespace pc {

Vector linear_forward(const Matrix& W, const Vector& b, const Vector& x) {
  if (W.cols != x.size())
    throw std::invalid_argument("linear_forward: W has " + std::to_string(W.cols) +
                                " cols but x has length " + std::to_string(x.size()));
  if (W.rows != b.size())
    throw std::invalid_argument("linear_forward: W has " + std::to_string(W.rows) +
                                " rows but b has length " + std::to_string(b.size()));
  Vector y(W.rows);
  kernels::matvec(W.data(), W.rows, W.cols, x.data(), y.data());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

void check_finite(const Vector& v, const std::string& what) {
  for (double d : v)
    if (!std::isfinite(d)) throw NumericError(what + ": non-finite entry");
}

void check_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericError(what + ": non-finite value");
}

}  // namespace pc
