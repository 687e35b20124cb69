#include "pc/lstm.hpp"

#include <cmath>
#include <stdexcept>

#include "pc/errors.hpp"
#include "pc/kernels.hpp"

namespace pc {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vector gate(const Matrix& W, const Vector& b, const Vector& z, bool is_tanh) {
  Vector a = linear_forward(W, b, z);
  for (double& v : a) v = is_tanh ? std::tanh(v) : sigmoid(v);
  return a;
}

}  // namespace

LstmCellParams::LstmCellParams(std::size_t in, std::size_t h)
    : d_in(in),
      d_h(h),
      w_i(h, in + h),
      w_f(h, in + h),
      w_o(h, in + h),
      w_g(h, in + h),
      b_i(h, 0.0),
      b_f(h, 0.0),
      b_o(h, 0.0),
      b_g(h, 0.0) {}

LstmState lstm_cell_forward(const LstmCellParams& params, const Vector& x,
                            const Vector& h_prev, const Vector& c_prev,
                            LstmStepCache* cache) {
  if (x.size() != params.d_in)
    throw std::invalid_argument("lstm_cell_forward: x has length " +
                                std::to_string(x.size()) + ", expected d_in = " +
                                std::to_string(params.d_in));
  if (h_prev.size() != params.d_h)
    throw std::invalid_argument("lstm_cell_forward: h_prev has length " +
                                std::to_string(h_prev.size()) + ", expected d_h = " +
                                std::to_string(params.d_h));
  if (c_prev.size() != params.d_h)
    throw std::invalid_argument("lstm_cell_forward: c_prev has length " +
                                std::to_string(c_prev.size()) + ", expected d_h = " +
                                std::to_string(params.d_h));

  Vector z;
  z.reserve(params.d_in + params.d_h);
  z.insert(z.end(), x.begin(), x.end());
  z.insert(z.end(), h_prev.begin(), h_prev.end());

  Vector i = gate(params.w_i, params.b_i, z, false);
  Vector f = gate(params.w_f, params.b_f, z, false);
  Vector o = gate(params.w_o, params.b_o, z, false);
  Vector g = gate(params.w_g, params.b_g, z, true);

  LstmState out;
  out.c.resize(params.d_h);
  out.h.resize(params.d_h);
  Vector tanh_c(params.d_h);
  for (std::size_t k = 0; k < params.d_h; ++k) {
    out.c[k] = f[k] * c_prev[k] + i[k] * g[k];
    tanh_c[k] = std::tanh(out.c[k]);
    out.h[k] = o[k] * tanh_c[k];
  }
  check_finite(out.h, "lstm_cell_forward h");
  check_finite(out.c, "lstm_cell_forward c");

  if (cache) {
    cache->z = std::move(z);
    cache->c_prev = c_prev;
    cache->gate_i = std::move(i);
    cache->gate_f = std::move(f);
    cache->gate_o = std::move(o);
    cache->gate_g = std::move(g);
    cache->c = out.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return out;
}

LstmGrads::LstmGrads(const LstmCellParams& p)
    : w_i(p.d_h, p.d_in + p.d_h),
      w_f(p.d_h, p.d_in + p.d_h),
      w_o(p.d_h, p.d_in + p.d_h),
      w_g(p.d_h, p.d_in + p.d_h),
      b_i(p.d_h, 0.0),
      b_f(p.d_h, 0.0),
      b_o(p.d_h, 0.0),
      b_g(p.d_h, 0.0) {}

void lstm_cell_backward(const LstmCellParams& params, const LstmStepCache& cache,
                        const Vector& dh, const Vector& dc, LstmGrads& grads,
                        Vector& dx, Vector& dh_prev, Vector& dc_prev) {
  const std::size_t d_h = params.d_h;
  const std::size_t d_z = params.d_in + d_h;

  Vector da_i(d_h), da_f(d_h), da_o(d_h), da_g(d_h);
  dc_prev.assign(d_h, 0.0);
  for (std::size_t k = 0; k < d_h; ++k) {
    const double i = cache.gate_i[k], f = cache.gate_f[k];
    const double o = cache.gate_o[k], g = cache.gate_g[k];
    const double tc = cache.tanh_c[k];
    const double dck = dc[k] + dh[k] * o * (1.0 - tc * tc);
    da_o[k] = dh[k] * tc * o * (1.0 - o);
    da_f[k] = dck * cache.c_prev[k] * f * (1.0 - f);
    da_i[k] = dck * g * i * (1.0 - i);
    da_g[k] = dck * i * (1.0 - g * g);
    dc_prev[k] = dck * f;
  }

  kernels::outer_add(grads.w_i.data(), d_h, d_z, da_i.data(), cache.z.data());
  kernels::outer_add(grads.w_f.data(), d_h, d_z, da_f.data(), cache.z.data());
  kernels::outer_add(grads.w_o.data(), d_h, d_z, da_o.data(), cache.z.data());
  kernels::outer_add(grads.w_g.data(), d_h, d_z, da_g.data(), cache.z.data());
  for (std::size_t k = 0; k < d_h; ++k) {
    grads.b_i[k] += da_i[k];
    grads.b_f[k] += da_f[k];
    grads.b_o[k] += da_o[k];
    grads.b_g[k] += da_g[k];
  }

  Vector dz(d_z, 0.0);
  kernels::matvec_tadd(params.w_i.data(), d_h, d_z, da_i.data(), dz.data());
  kernels::matvec_tadd(params.w_f.data(), d_h, d_z, da_f.data(), dz.data());
  kernels::matvec_tadd(params.w_o.data(), d_h, d_z, da_o.data(), dz.data());
  kernels::matvec_tadd(params.w_g.data(), d_h, d_z, da_g.data(), dz.data());

  dx.assign(dz.begin(), dz.begin() + static_cast<long>(params.d_in));
  dh_prev.assign(dz.begin() + static_cast<long>(params.d_in), dz.end());
}

}  // namespace pc
