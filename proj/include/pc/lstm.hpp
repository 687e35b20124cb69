#pragma once

#include "pc/tensor.hpp"

namespace pc {

// Standard LSTM cell. Gate weights act on the concatenation [x; h_prev]:
//   i = sigmoid(Wi z + bi)   f = sigmoid(Wf z + bf)
//   o = sigmoid(Wo z + bo)   g = tanh(Wg z + bg)
//   c = f*c_prev + i*g       h = o*tanh(c)
struct LstmCellParams {
  std::size_t d_in = 0;
  std::size_t d_h = 0;
  Matrix w_i, w_f, w_o, w_g;  // each d_h x (d_in + d_h)
  Vector b_i, b_f, b_o, b_g;  // each d_h

  LstmCellParams() = default;
  LstmCellParams(std::size_t in, std::size_t h);
};

struct LstmState {
  Vector h;
  Vector c;
};

// Per-step activations saved for backpropagation through time.
struct LstmStepCache {
  Vector z;  // [x; h_prev]
  Vector c_prev;
  Vector gate_i, gate_f, gate_o, gate_g;
  Vector c, tanh_c;
};

LstmState lstm_cell_forward(const LstmCellParams& params, const Vector& x,
                            const Vector& h_prev, const Vector& c_prev,
                            LstmStepCache* cache = nullptr);

// Gradient accumulators for one cell; same shapes as the parameters.
struct LstmGrads {
  Matrix w_i, w_f, w_o, w_g;
  Vector b_i, b_f, b_o, b_g;

  explicit LstmGrads(const LstmCellParams& p);
};

// Backward through one step. dh/dc are gradients w.r.t. this step's outputs;
// on return dx, dh_prev, dc_prev hold input gradients and `grads` has the
// parameter contributions added in.
void lstm_cell_backward(const LstmCellParams& params, const LstmStepCache& cache,
                        const Vector& dh, const Vector& dc, LstmGrads& grads,
                        Vector& dx, Vector& dh_prev, Vector& dc_prev);

}  // namespace pc
