#include "hlsforge/adam.hpp"

#include <cmath>

#include "hlsforge/error.hpp"

namespace hlsforge::nn {

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr) {
  if (!(state.beta1 > 0.0 && state.beta1 < 1.0 && state.beta2 > 0.0 && state.beta2 < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "adam: betas must lie in (0, 1)");
  if (state.first_moment.empty()) {
    for (const auto* p : params) {
      state.first_moment.emplace_back(p->value.shape());
      state.second_moment.emplace_back(p->value.shape());
    }
  }
  if (state.first_moment.size() != params.size())
    throw Error(ErrorKind::kShape, "adam: parameter count changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_shape(state.first_moment[i], params[i]->value.shape(), "adam moment");
    if (!params[i]->grad.all_finite())
      throw Error(ErrorKind::kDivergence, "adam: non-finite gradient for '" + params[i]->name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p.value[k] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace hlsforge::nn
