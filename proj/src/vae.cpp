#include "hlsforge/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hlsforge/adam.hpp"
#include "hlsforge/config_io.hpp"
#include "hlsforge/error.hpp"

namespace hlsforge {
namespace {

using nn::Tensor;

constexpr double kProbClamp = 1e-7;
constexpr std::size_t kGenerateChunk = 256;

// softplus(a) - x * a, the BCE of target x under sigmoid(a).
double bce_with_logit(double x, double a) {
  return std::max(a, 0.0) - a * x + std::log1p(std::exp(-std::abs(a)));
}

}  // namespace

void MlpVaeConfig::validate() const {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::kInvalidArgument, "mlpvae: empty input shape");
  if (latent_dim == 0) throw Error(ErrorKind::kInvalidArgument, "mlpvae: latent_dim must be at least 1");
  if (hidden_sizes.empty() || std::any_of(hidden_sizes.begin(), hidden_sizes.end(), [](auto h) { return h == 0; }))
    throw Error(ErrorKind::kInvalidArgument, "mlpvae: hidden sizes must be positive");
  if (!(lr >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "mlpvae: learning rate must be non-negative");
  if (batch_size == 0) throw Error(ErrorKind::kInvalidArgument, "mlpvae: batch_size must be positive");
  if (!(msb_weight_gamma >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "mlpvae: gamma must be non-negative");
}

std::vector<double> msb_weights(std::size_t cols, double gamma) {
  std::vector<double> w(cols, 1.0);
  if (cols < 2) return w;
  const double span = static_cast<double>(cols - 1);
  for (std::size_t j = 0; j < cols; ++j) w[j] = 1.0 + gamma * static_cast<double>(cols - 1 - j) / span;
  return w;
}

double bce(double target, double p) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

double kl_divergence(std::span<const double> mu, std::span<const double> logvar) {
  if (mu.size() != logvar.size()) throw Error(ErrorKind::kShape, "kl: mu/logvar size mismatch");
  double kl = 0.0;
  for (std::size_t d = 0; d < mu.size(); ++d) kl += mu[d] * mu[d] + std::exp(logvar[d]) - 1.0 - logvar[d];
  return 0.5 * kl;
}

ElboTerms elbo_terms(const Tensor& x, const Tensor& logits, const Tensor& mu, const Tensor& logvar,
                     std::span<const double> column_weights, ElboGradients* grads) {
  nn::require_shape(logits, x.shape(), "elbo logits");
  nn::require_shape(logvar, mu.shape(), "elbo logvar");
  const std::size_t n = x.dim(0), width = x.dim(1), latent = mu.dim(1);
  const std::size_t cols = column_weights.size();
  if (mu.dim(0) != n || cols == 0 || width % cols != 0)
    throw Error(ErrorKind::kShape, "elbo: inconsistent batch shapes");
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grads) {
    grads->logits = Tensor(logits.shape());
    grads->mu = Tensor(mu.shape());
    grads->logvar = Tensor(mu.shape());
  }
  double recon = 0.0, kl = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = column_weights[(i % width) % cols];
    recon += w * bce_with_logit(x[i], logits[i]);
    if (grads) grads->logits[i] = w * (nn::sigmoid(logits[i]) - x[i]) * inv_n;
  }
  for (std::size_t i = 0; i < n * latent; ++i) {
    const double var = std::exp(logvar[i]);
    kl += 0.5 * (mu[i] * mu[i] + var - 1.0 - logvar[i]);
    if (grads) {
      grads->mu[i] = mu[i] * inv_n;
      grads->logvar[i] = 0.5 * (var - 1.0) * inv_n;
    }
  }
  ElboTerms t;
  t.recon = recon * inv_n;
  t.kl = kl * inv_n;
  t.loss = t.recon + t.kl;
  if (!std::isfinite(t.loss))
    throw Error(ErrorKind::kDivergence, "elbo: non-finite loss (recon " + std::to_string(t.recon) + ", kl " +
                                            std::to_string(t.kl) + ")");
  return t;
}

Tensor reparameterize(const Tensor& mu, const Tensor& logvar, Rng& rng, Tensor* eps) {
  nn::require_shape(logvar, mu.shape(), "reparameterize");
  Tensor e(mu.shape());
  for (auto& v : e.values()) v = rng.normal();
  Tensor z(mu.shape());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + std::exp(0.5 * logvar[i]) * e[i];
  if (eps) *eps = std::move(e);
  return z;
}

MlpVae::MlpVae(MlpVaeConfig config, std::vector<std::string> row_labels)
    : config_(std::move(config)),
      row_labels_(std::move(row_labels)),
      column_weights_(msb_weights(config_.cols, config_.msb_weight_gamma)) {
  config_.validate();
  if (!row_labels_.empty() && row_labels_.size() != config_.rows)
    throw Error(ErrorKind::kInvalidArgument, "mlpvae: row label count does not match rows");
  Rng init = Rng(config_.seed).split(0);
  std::size_t width = config_.input_bits();
  for (auto h : config_.hidden_sizes) {
    encoder_.add<nn::Linear>(width, h, init);
    encoder_.add<nn::ReLU>();
    width = h;
  }
  mu_head_.add<nn::Linear>(width, config_.latent_dim, init);
  logvar_head_.add<nn::Linear>(width, config_.latent_dim, init);
  width = config_.latent_dim;
  for (auto it = config_.hidden_sizes.rbegin(); it != config_.hidden_sizes.rend(); ++it) {
    decoder_.add<nn::Linear>(width, *it, init);
    decoder_.add<nn::ReLU>();
    width = *it;
  }
  // Outputs logits; the sigmoid is applied in decode() and inside the loss.
  decoder_.add<nn::Linear>(width, config_.input_bits(), init);
}

MlpVae::Pass MlpVae::forward(const Tensor& x, Rng& rng) {
  if (x.rank() != 2 || x.dim(1) != config_.input_bits())
    throw Error(ErrorKind::kShape, "mlpvae: input must be [N, " + std::to_string(config_.input_bits()) + "]");
  Pass p;
  const Tensor h = encoder_.forward(x);
  p.mu = mu_head_.forward(h);
  p.logvar = logvar_head_.forward(h);
  p.z = reparameterize(p.mu, p.logvar, rng, &p.eps);
  p.logits = decoder_.forward(p.z);
  return p;
}

ElboTerms MlpVae::loss_and_gradients(const Tensor& x, Rng& rng) {
  const Pass p = forward(x, rng);
  ElboGradients g;
  const ElboTerms terms = elbo_terms(x, p.logits, p.mu, p.logvar, column_weights_, &g);
  const Tensor dz = decoder_.backward(g.logits);
  // z = mu + exp(logvar/2) * eps
  Tensor dmu = g.mu, dlogvar = g.logvar;
  for (std::size_t i = 0; i < dz.size(); ++i) {
    dmu[i] += dz[i];
    dlogvar[i] += dz[i] * p.eps[i] * 0.5 * std::exp(0.5 * p.logvar[i]);
  }
  Tensor dh = mu_head_.backward(dmu);
  const Tensor dh2 = logvar_head_.backward(dlogvar);
  for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dh2[i];
  encoder_.backward(dh);
  return terms;
}

ElboTerms MlpVae::elbo_loss(const Tensor& x, Rng& rng) {
  const Pass p = forward(x, rng);
  return elbo_terms(x, p.logits, p.mu, p.logvar, column_weights_);
}

Tensor MlpVae::decode(const Tensor& z) {
  if (z.rank() != 2 || z.dim(1) != config_.latent_dim)
    throw Error(ErrorKind::kShape, "mlpvae: latent codes must be [N, " + std::to_string(config_.latent_dim) + "]");
  Tensor probs = decoder_.forward(z);
  for (auto& v : probs.values()) v = nn::sigmoid(v);
  return probs;
}

std::vector<nn::Parameter*> MlpVae::parameters() {
  std::vector<nn::Parameter*> out = encoder_.parameters();
  for (auto* p : mu_head_.parameters()) out.push_back(p);
  for (auto* p : logvar_head_.parameters()) out.push_back(p);
  for (auto* p : decoder_.parameters()) out.push_back(p);
  return out;
}

void MlpVae::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

nn::Checkpoint MlpVae::to_checkpoint() {
  nlohmann::json desc;
  desc["model"] = "mlpvae";
  desc["config"] = config_;
  desc["row_labels"] = row_labels_;
  desc["architecture"] = {{"encoder", encoder_.describe()},
                          {"mu_head", mu_head_.describe()},
                          {"logvar_head", logvar_head_.describe()},
                          {"decoder", decoder_.describe() + " > sigmoid"}};
  nn::Checkpoint ckpt;
  ckpt.descriptor = desc.dump();
  for (auto* p : parameters()) ckpt.tensors.push_back(p->value);
  return ckpt;
}

MlpVae MlpVae::from_checkpoint(const nn::Checkpoint& ckpt) {
  nlohmann::json desc;
  try {
    desc = nlohmann::json::parse(ckpt.descriptor);
    if (desc.at("model").get<std::string>() != "mlpvae")
      throw Error(ErrorKind::kData, "checkpoint does not hold an mlpvae model");
    MlpVae model(desc.at("config").get<MlpVaeConfig>(), desc.at("row_labels").get<std::vector<std::string>>());
    std::vector<Tensor*> targets;
    for (auto* p : model.parameters()) targets.push_back(&p->value);
    nn::restore_tensors(ckpt.tensors, targets);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kData, std::string("bad mlpvae checkpoint descriptor: ") + e.what());
  }
}

Tensor to_batch(std::span<const BitMatrix> data, std::span<const std::size_t> indices) {
  if (data.empty()) throw Error(ErrorKind::kInvalidArgument, "to_batch: no data");
  const std::size_t width = data.front().bits.size();
  Tensor x({indices.size(), width});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& bits = data[indices[r]].bits;
    if (bits.size() != width) throw Error(ErrorKind::kShape, "to_batch: matrices differ in shape");
    for (std::size_t j = 0; j < width; ++j) x[r * width + j] = bits[j];
  }
  return x;
}

VaeTrainResult train_vae(std::span<const BitMatrix> data, const MlpVaeConfig& config) {
  config.validate();
  if (data.size() < 2 * config.batch_size)
    throw Error(ErrorKind::kInvalidArgument, "train_vae: need at least 2 * batch_size = " +
                                                 std::to_string(2 * config.batch_size) + " samples, got " +
                                                 std::to_string(data.size()));
  for (const auto& m : data)
    if (m.rows != config.rows || m.cols != config.cols)
      throw Error(ErrorKind::kShape, "train_vae: sample shape does not match config rows x cols");

  VaeTrainResult result{MlpVae(config, data.front().row_labels), {}};
  MlpVae& model = result.model;
  Rng rng = Rng(config.seed).split(1);
  Rng trace_rng = Rng(config.seed).split(2);
  nn::AdamState adam;
  auto params = model.parameters();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<BitVector> reference;
  if (config.trace_samples > 0) {
    std::vector<std::size_t> pick = order;
    trace_rng.shuffle(pick);
    pick.resize(std::min(pick.size(), config.trace_samples));
    for (auto i : pick) reference.push_back(BitVector::from_matrix(data[i]));
  }

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const Tensor x = to_batch(data, std::span(order).subspan(start, end - start));
      model.zero_grad();
      const ElboTerms terms = model.loss_and_gradients(x, rng);
      nn::adam_step(params, adam, config.lr);
      loss_sum += terms.loss * static_cast<double>(end - start);
    }
    EpochTrace t;
    t.epoch = epoch;
    t.loss = loss_sum / static_cast<double>(order.size());
    if (config.trace_samples > 0) {
      const auto synth = to_bit_vectors(generate_vae(model, config.trace_samples, trace_rng));
      t.metrics = score(reference, synth, trace_rng);
    }
    result.trace.push_back(t);
  }
  return result;
}

std::vector<BitMatrix> generate_vae(MlpVae& model, std::size_t n, Rng& rng) {
  const auto& cfg = model.config();
  std::vector<BitMatrix> out;
  out.reserve(n);
  for (std::size_t start = 0; start < n; start += kGenerateChunk) {
    const std::size_t count = std::min(kGenerateChunk, n - start);
    Tensor z({count, cfg.latent_dim});
    for (auto& v : z.values()) v = rng.normal();
    const Tensor probs = model.decode(z);
    for (std::size_t s = 0; s < count; ++s) {
      BitMatrix m(cfg.rows, cfg.cols);
      if (!model.row_labels().empty()) m.row_labels = model.row_labels();
      for (std::size_t j = 0; j < m.bits.size(); ++j) {
        const double p = probs[s * m.bits.size() + j];
        m.bits[j] = cfg.bernoulli_sampling ? rng.bernoulli(p) : (p > 0.5 ? 1 : 0);
      }
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace hlsforge
