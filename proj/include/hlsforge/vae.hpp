#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hlsforge/checkpoint.hpp"
#include "hlsforge/codec.hpp"
#include "hlsforge/fidelity.hpp"
#include "hlsforge/layers.hpp"
#include "hlsforge/rng.hpp"

namespace hlsforge {

struct MlpVaeConfig {
  std::size_t rows = 20;  // bit rows per sample
  std::size_t cols = 32;
  std::vector<std::size_t> hidden_sizes{512, 128};
  std::size_t latent_dim = 16;
  double lr = 1e-4;
  std::size_t batch_size = 20;
  std::size_t epochs = 150;
  double msb_weight_gamma = 3.0;
  std::uint64_t seed = 0;
  bool bernoulli_sampling = false;  // threshold at 0.5 otherwise
  std::size_t trace_samples = 256;  // per-epoch evaluation size; 0 disables

  std::size_t input_bits() const { return rows * cols; }
  void validate() const;
};

// Per-column reconstruction weight, linear from 1 + gamma at the MSB
// (column 0) down to 1 at the LSB.
std::vector<double> msb_weights(std::size_t cols, double gamma);

// Binary cross entropy of a target bit under predicted probability p,
// with p clamped to [1e-7, 1 - 1e-7].
double bce(double target, double p);

// 0.5 * sum(mu^2 + exp(logvar) - 1 - logvar).
double kl_divergence(std::span<const double> mu, std::span<const double> logvar);

struct ElboTerms {
  double loss = 0.0;   // recon + kl, averaged over the batch
  double recon = 0.0;
  double kl = 0.0;
};

struct ElboGradients {
  nn::Tensor logits, mu, logvar;
};

// Weighted BCE (from decoder logits) plus KL, each summed per sample and
// averaged over the batch. x and logits are [N, rows*cols]; mu and logvar
// are [N, latent]. Fills `grads` when non-null.
ElboTerms elbo_terms(const nn::Tensor& x, const nn::Tensor& logits, const nn::Tensor& mu,
                     const nn::Tensor& logvar, std::span<const double> column_weights,
                     ElboGradients* grads = nullptr);

class MlpVae {
 public:
  explicit MlpVae(MlpVaeConfig config, std::vector<std::string> row_labels = {});

  const MlpVaeConfig& config() const { return config_; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }

  struct Pass {
    nn::Tensor mu, logvar, eps, z, logits;
  };
  // Encoder, reparameterization and decoder; caches activations for backward.
  Pass forward(const nn::Tensor& x, Rng& rng);
  // Loss of one batch and accumulated parameter gradients.
  ElboTerms loss_and_gradients(const nn::Tensor& x, Rng& rng);
  ElboTerms elbo_loss(const nn::Tensor& x, Rng& rng);

  // Decoder probabilities for latent codes z of shape [N, latent].
  nn::Tensor decode(const nn::Tensor& z);

  std::vector<nn::Parameter*> parameters();
  void zero_grad();

  nn::Checkpoint to_checkpoint();
  static MlpVae from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  MlpVaeConfig config_;
  std::vector<std::string> row_labels_;
  std::vector<double> column_weights_;
  nn::Sequential encoder_;
  nn::Sequential mu_head_;      // shares the last hidden layer with logvar_head_
  nn::Sequential logvar_head_;
  nn::Sequential decoder_;
};

// z = mu + exp(logvar / 2) * eps with eps ~ N(0, I). Returns z and fills eps.
nn::Tensor reparameterize(const nn::Tensor& mu, const nn::Tensor& logvar, Rng& rng, nn::Tensor* eps = nullptr);

// Flattened 0/1 rows of the given matrices as an [N, rows*cols] tensor.
nn::Tensor to_batch(std::span<const BitMatrix> data, std::span<const std::size_t> indices);

struct VaeTrainResult {
  MlpVae model;
  std::vector<EpochTrace> trace;
};

// Minibatch Adam on the ELBO. Requires at least 2 * batch_size samples.
VaeTrainResult train_vae(std::span<const BitMatrix> data, const MlpVaeConfig& config);

std::vector<BitMatrix> generate_vae(MlpVae& model, std::size_t n, Rng& rng);

}  // namespace hlsforge
