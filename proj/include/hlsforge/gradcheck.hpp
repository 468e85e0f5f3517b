#pragma once

#include <functional>
#include <span>

#include "hlsforge/layers.hpp"
#include "hlsforge/rng.hpp"

namespace hlsforge::nn {

inline constexpr double kGradcheckStep = 1e-4;

// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
// gradient is zero from dividing rounding noise by zero.
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Max relative error between `analytic` and central differences of `loss`
// with respect to each entry of `x`. Entries are perturbed in place and
// restored.
double gradcheck(const std::function<double()>& loss, std::span<double> x,
                 std::span<const double> analytic, double h = kGradcheckStep);

// Checks input and parameter gradients of `layer` under the scalar probe
// loss sum(w * layer(x)) with random weights w.
double gradcheck_layer(Layer& layer, const Tensor& input, Rng& rng, double h = kGradcheckStep);

}  // namespace hlsforge::nn
