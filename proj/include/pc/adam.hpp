#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pc/tensor.hpp"

namespace pc {

// Adam with bias correction over a named parameter set. Moments are keyed by
// parameter name and lazily shaped on the first step.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, Vector> m;
  std::map<std::string, Vector> v;
};

// One update over every parameter present in `grads`. The step counter is
// incremented before bias correction. Shape mismatch between a parameter and
// its gradient throws std::invalid_argument.
void adam_step(AdamState& state, std::vector<ParamRef>& params,
               const GradStore& grads);

}  // namespace pc
