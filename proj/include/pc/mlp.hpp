#pragma once

#include <functional>
#include <utility>

#include "pc/tensor.hpp"

namespace pc {

// Two-layer scalar regressor: s = w2 . tanh(W1 x + b1) + b2.
struct TwoLayerParams {
  Matrix w1;  // d_hidden x d_in
  Vector b1;  // d_hidden
  Matrix w2;  // 1 x d_hidden
  Vector b2;  // length 1

  TwoLayerParams() = default;
  TwoLayerParams(std::size_t d_in, std::size_t d_hidden);
};

struct TwoLayerCache {
  Vector x;
  Vector hidden;  // tanh activations
};

double two_layer_forward(const TwoLayerParams& params, const Vector& x,
                         TwoLayerCache* cache = nullptr);

struct TwoLayerGrads {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  explicit TwoLayerGrads(const TwoLayerParams& p);
};

// ds is the gradient w.r.t. the scalar output; returns dx.
Vector two_layer_backward(const TwoLayerParams& params, const TwoLayerCache& cache,
                          double ds, TwoLayerGrads& grads);

// max(0, s_neg - s_pos + margin). Subgradient at the kink is 0.
double margin_ranking_loss(double s_pos, double s_neg, double margin);

// (d/ds_pos, d/ds_neg): (-1, +1) when the hinge is strictly active, else (0, 0).
std::pair<double, double> margin_ranking_loss_grad(double s_pos, double s_neg,
                                                   double margin);

// Central finite differences of f over the flat array p, step h.
Vector finite_diff_grad(const std::function<double()>& f, Vector& p, double h);

}  // namespace pc
