#include "pc/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "pc/kernels.hpp"

namespace pc {

void adam_step(AdamState& state, std::vector<ParamRef>& params,
               const GradStore& grads) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  for (ParamRef& ref : params) {
    auto it = grads.find(ref.name);
    if (it == grads.end()) continue;
    const Vector& g = it->second;
    Vector& p = *ref.values;
    if (g.size() != p.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch for " + ref.name);

    Vector& m = state.m[ref.name];
    Vector& v = state.v[ref.name];
    if (m.empty()) m.assign(p.size(), 0.0);
    if (v.empty()) v.assign(p.size(), 0.0);
    if (m.size() != p.size() || v.size() != p.size())
      throw std::invalid_argument("adam_step: moment shape mismatch for " + ref.name);

    kernels::adam_update(p.data(), m.data(), v.data(), g.data(), p.size(), state.lr,
                         state.beta1, state.beta2, state.eps, bc1, bc2);
  }
}

}  // namespace pc
