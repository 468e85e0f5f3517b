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

struct DcganConfig {
  std::size_t rows = 20;  // matrix shape before padding
  std::size_t cols = 32;
  std::size_t canvas_rows = 32;  // 32 or 64
  std::size_t canvas_cols = 32;
  std::size_t latent_dim = 100;
  std::size_t feature_maps = 32;
  double lr_generator = 7e-2;
  double lr_discriminator = 1e-4;
  std::size_t batch_size = 20;
  std::size_t epochs = 150;
  std::uint64_t seed = 0;
  std::size_t trace_samples = 256;  // 0 disables per-epoch scoring

  void validate() const;
};

struct GanLosses {
  double d_loss = 0.0;  // BCE(D(real), 1) + BCE(D(fake), 0), batch mean
  double g_loss = 0.0;  // BCE(D(fake), 1), batch mean
};

// Losses from discriminator probabilities, clamped to [1e-7, 1 - 1e-7].
GanLosses gan_losses(std::span<const double> d_real, std::span<const double> d_fake);

struct GanLogitGradients {
  std::vector<double> real;    // d d_loss / d real logit
  std::vector<double> fake;    // d d_loss / d fake logit
  std::vector<double> g_fake;  // d g_loss / d fake logit
};

// Same losses computed from discriminator logits with a stable softplus.
GanLosses gan_losses_from_logits(std::span<const double> real_logits, std::span<const double> fake_logits,
                                 GanLogitGradients* grads = nullptr);

// Zero-fills a matrix onto a larger canvas (top-left aligned) and back.
BitMatrix pad_matrix(const BitMatrix& m, std::size_t canvas_rows, std::size_t canvas_cols);
BitMatrix crop_matrix(const BitMatrix& m, std::size_t rows, std::size_t cols);

class Dcgan {
 public:
  explicit Dcgan(DcganConfig config, std::vector<std::string> row_labels = {});

  const DcganConfig& config() const { return config_; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }

  // z: [N, latent] -> canvas probabilities [N, 1, canvas_rows, canvas_cols].
  nn::Tensor generate(const nn::Tensor& z);
  // Canvas batch -> logits [N].
  nn::Tensor discriminate(const nn::Tensor& x);

  nn::Sequential& generator() { return generator_; }
  nn::Sequential& discriminator() { return discriminator_; }
  void set_training(bool training);

  nn::Checkpoint to_checkpoint();
  static Dcgan from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  DcganConfig config_;
  std::vector<std::string> row_labels_;
  nn::Sequential generator_;      // ends in a sigmoid
  nn::Sequential discriminator_;  // ends in a logit; the sigmoid is in the loss
};

// Mean discriminator outputs and losses over one epoch.
struct GanEpochStats {
  double d_loss = 0.0;
  double g_loss = 0.0;
  double d_real = 0.0;
  double d_fake = 0.0;
};

struct GanTrainResult {
  Dcgan model;
  std::vector<EpochTrace> trace;  // loss column holds the generator loss
  std::vector<GanEpochStats> stats;
};

// One discriminator step then one generator step per minibatch, each with
// its own Adam state and learning rate.
GanTrainResult train_gan(std::span<const BitMatrix> data, const DcganConfig& config);

// Samples z ~ N(0, I), runs the generator in evaluation mode, crops to the
// trained shape and thresholds at 0.5.
std::vector<BitMatrix> generate_gan(Dcgan& model, std::size_t n, Rng& rng);

}  // namespace hlsforge
