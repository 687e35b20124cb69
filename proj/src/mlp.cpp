#include "pc/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "pc/errors.hpp"
#include "pc/kernels.hpp"

namespace pc {

TwoLayerParams::TwoLayerParams(std::size_t d_in, std::size_t d_hidden)
    : w1(d_hidden, d_in), b1(d_hidden, 0.0), w2(1, d_hidden), b2(1, 0.0) {}

double two_layer_forward(const TwoLayerParams& params, const Vector& x,
                         TwoLayerCache* cache) {
  Vector hidden = linear_forward(params.w1, params.b1, x);
  for (double& v : hidden) v = std::tanh(v);
  const Vector out = linear_forward(params.w2, params.b2, hidden);
  check_finite(out[0], "two_layer_forward");
  if (cache) {
    cache->x = x;
    cache->hidden = std::move(hidden);
  }
  return out[0];
}

TwoLayerGrads::TwoLayerGrads(const TwoLayerParams& p)
    : w1(p.w1.rows, p.w1.cols), b1(p.b1.size(), 0.0), w2(p.w2.rows, p.w2.cols),
      b2(1, 0.0) {}

Vector two_layer_backward(const TwoLayerParams& params, const TwoLayerCache& cache,
                          double ds, TwoLayerGrads& grads) {
  const std::size_t d_hidden = cache.hidden.size();

  kernels::outer_add(grads.w2.data(), 1, d_hidden, &ds, cache.hidden.data());
  grads.b2[0] += ds;

  Vector du(d_hidden);
  for (std::size_t k = 0; k < d_hidden; ++k) {
    const double a = cache.hidden[k];
    du[k] = ds * params.w2.at(0, k) * (1.0 - a * a);
  }

  kernels::outer_add(grads.w1.data(), grads.w1.rows, grads.w1.cols, du.data(),
                     cache.x.data());
  for (std::size_t k = 0; k < d_hidden; ++k) grads.b1[k] += du[k];

  Vector dx(cache.x.size(), 0.0);
  kernels::matvec_tadd(params.w1.data(), params.w1.rows, params.w1.cols, du.data(),
                       dx.data());
  return dx;
}

double margin_ranking_loss(double s_pos, double s_neg, double margin) {
  if (margin < 0.0) throw std::invalid_argument("margin_ranking_loss: negative margin");
  return std::max(0.0, s_neg - s_pos + margin);
}

std::pair<double, double> margin_ranking_loss_grad(double s_pos, double s_neg,
                                                   double margin) {
  if (margin < 0.0) throw std::invalid_argument("margin_ranking_loss: negative margin");
  if (s_neg - s_pos + margin > 0.0) return {-1.0, 1.0};
  return {0.0, 0.0};
}

Vector finite_diff_grad(const std::function<double()>& f, Vector& p, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be > 0");
  Vector grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double fp = f();
    p[i] = saved - h;
    const double fm = f();
    p[i] = saved;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace pc
