#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hlsforge/layers.hpp"

namespace hlsforge::nn {

struct AdamState {
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<Tensor> first_moment;   // one per parameter, created on first step
  std::vector<Tensor> second_moment;
};

// One bias-corrected Adam update of every parameter from its accumulated
// gradient. Throws Error(kDivergence) on a non-finite gradient.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr);

}  // namespace hlsforge::nn
