#include "hlsforge/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hlsforge/error.hpp"

namespace hlsforge::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double gradcheck(const std::function<double()>& loss, std::span<double> x,
                 std::span<const double> analytic, double h) {
  if (x.size() != analytic.size()) throw Error(ErrorKind::kShape, "gradcheck: gradient size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = loss();
    x[i] = saved - h;
    const double down = loss();
    x[i] = saved;
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

double gradcheck_layer(Layer& layer, const Tensor& input, Rng& rng, double h) {
  Tensor x = input;
  const Tensor probe_out = layer.forward(x);
  Tensor w(probe_out.shape());
  for (auto& v : w.values()) v = rng.uniform(-1.0, 1.0);

  auto params = layer.parameters();
  for (auto* p : params) p->zero_grad();
  layer.forward(x);
  const Tensor dx = layer.backward(w);
  std::vector<Tensor> param_grads;
  for (auto* p : params) param_grads.push_back(p->grad);

  // Batchnorm running statistics drift during probing; they do not affect
  // training-mode outputs.
  auto loss = [&] { return dot(layer.forward(x), w); };
  double worst = gradcheck(loss, x.values(), dx.values(), h);
  for (std::size_t i = 0; i < params.size(); ++i)
    worst = std::max(worst, gradcheck(loss, params[i]->value.values(), param_grads[i].values(), h));
  return worst;
}

}  // namespace hlsforge::nn
