#include "hlsforge/gan.hpp"

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
constexpr std::size_t kGenerateChunk = 128;

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

double clamped_log(double p) { return std::log(std::clamp(p, kProbClamp, 1.0 - kProbClamp)); }

// Batch of padded canvases [N, 1, R, C] for the given sample indices.
Tensor canvas_batch(std::span<const BitMatrix> data, std::span<const std::size_t> indices, std::size_t canvas_rows,
                    std::size_t canvas_cols) {
  Tensor x({indices.size(), 1, canvas_rows, canvas_cols});
  for (std::size_t s = 0; s < indices.size(); ++s) {
    const BitMatrix& m = data[indices[s]];
    double* dst = x.data() + s * canvas_rows * canvas_cols;
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) dst[r * canvas_cols + c] = m.at(r, c);
  }
  return x;
}

Tensor normal_batch(std::size_t n, std::size_t dim, Rng& rng) {
  Tensor z({n, dim, 1, 1});
  for (auto& v : z.values()) v = rng.normal();
  return z;
}

double mean_sigmoid(const Tensor& logits) {
  double s = 0.0;
  for (double a : logits.values()) s += nn::sigmoid(a);
  return s / static_cast<double>(logits.size());
}

}  // namespace

void DcganConfig::validate() const {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::kInvalidArgument, "dcgan: empty input shape");
  if (latent_dim == 0) throw Error(ErrorKind::kInvalidArgument, "dcgan: latent_dim must be at least 1");
  if (feature_maps == 0) throw Error(ErrorKind::kInvalidArgument, "dcgan: feature_maps must be positive");
  if (!(lr_generator > 0.0) || !(lr_discriminator > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "dcgan: learning rates must be positive");
  if (batch_size == 0) throw Error(ErrorKind::kInvalidArgument, "dcgan: batch_size must be positive");
  if (canvas_rows % 8 != 0 || canvas_cols % 8 != 0 || canvas_rows == 0 || canvas_cols == 0)
    throw Error(ErrorKind::kInvalidArgument, "dcgan: canvas sides must be positive multiples of 8");
  if (rows > canvas_rows)
    throw Error(ErrorKind::kInvalidArgument, "dcgan: " + std::to_string(rows) + " rows do not fit a " +
                                                 std::to_string(canvas_rows) + "-row canvas; use a " +
                                                 std::to_string(rows <= 64 ? 64 : (rows + 7) / 8 * 8) +
                                                 "-row canvas (canvas_rows)");
  if (cols > canvas_cols)
    throw Error(ErrorKind::kInvalidArgument, "dcgan: " + std::to_string(cols) + " columns do not fit the canvas");
}

GanLosses gan_losses(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.empty() || d_real.size() != d_fake.size())
    throw Error(ErrorKind::kShape, "gan_losses: real and fake batches must be non-empty and equal in size");
  GanLosses out;
  for (std::size_t i = 0; i < d_real.size(); ++i) {
    out.d_loss -= clamped_log(d_real[i]) + clamped_log(1.0 - d_fake[i]);
    out.g_loss -= clamped_log(d_fake[i]);
  }
  out.d_loss /= static_cast<double>(d_real.size());
  out.g_loss /= static_cast<double>(d_real.size());
  return out;
}

GanLosses gan_losses_from_logits(std::span<const double> real_logits, std::span<const double> fake_logits,
                                 GanLogitGradients* grads) {
  if (real_logits.empty() || fake_logits.empty())
    throw Error(ErrorKind::kShape, "gan_losses: empty batch");
  GanLosses out;
  const double inv_r = 1.0 / static_cast<double>(real_logits.size());
  const double inv_f = 1.0 / static_cast<double>(fake_logits.size());
  if (grads) {
    grads->real.assign(real_logits.size(), 0.0);
    grads->fake.assign(fake_logits.size(), 0.0);
    grads->g_fake.assign(fake_logits.size(), 0.0);
  }
  // -log sigmoid(a) = softplus(-a); -log(1 - sigmoid(a)) = softplus(a).
  for (std::size_t i = 0; i < real_logits.size(); ++i) {
    const double a = real_logits[i];
    out.d_loss += softplus(-a) * inv_r;
    if (grads) grads->real[i] = (nn::sigmoid(a) - 1.0) * inv_r;
  }
  for (std::size_t i = 0; i < fake_logits.size(); ++i) {
    const double a = fake_logits[i];
    out.d_loss += softplus(a) * inv_f;
    out.g_loss += softplus(-a) * inv_f;
    if (grads) {
      grads->fake[i] = nn::sigmoid(a) * inv_f;
      grads->g_fake[i] = (nn::sigmoid(a) - 1.0) * inv_f;
    }
  }
  if (!std::isfinite(out.d_loss) || !std::isfinite(out.g_loss))
    throw Error(ErrorKind::kDivergence, "gan: non-finite loss (d " + std::to_string(out.d_loss) + ", g " +
                                            std::to_string(out.g_loss) + ")");
  return out;
}

BitMatrix pad_matrix(const BitMatrix& m, std::size_t canvas_rows, std::size_t canvas_cols) {
  if (m.rows > canvas_rows || m.cols > canvas_cols)
    throw Error(ErrorKind::kShape, "pad: matrix " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                                       " exceeds canvas " + std::to_string(canvas_rows) + "x" +
                                       std::to_string(canvas_cols));
  BitMatrix out(canvas_rows, canvas_cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::copy(m.row(r).begin(), m.row(r).end(), out.row(r).begin());
    out.row_labels[r] = m.row_labels[r];
  }
  return out;
}

BitMatrix crop_matrix(const BitMatrix& m, std::size_t rows, std::size_t cols) {
  if (rows > m.rows || cols > m.cols) throw Error(ErrorKind::kShape, "crop: region exceeds matrix");
  BitMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(m.row(r).begin(), cols, out.row(r).begin());
    out.row_labels[r] = m.row_labels[r];
  }
  return out;
}

Dcgan::Dcgan(DcganConfig config, std::vector<std::string> row_labels)
    : config_(std::move(config)), row_labels_(std::move(row_labels)) {
  config_.validate();
  if (!row_labels_.empty() && row_labels_.size() != config_.rows)
    throw Error(ErrorKind::kInvalidArgument, "dcgan: row label count does not match rows");
  Rng init = Rng(config_.seed).split(0);
  const std::size_t f = config_.feature_maps;
  const nn::ConvGeometry first{config_.canvas_rows / 8, config_.canvas_cols / 8, 1, 0};
  const nn::ConvGeometry up{};  // kernel 4, stride 2, pad 1 doubles each side

  // Bias is dropped ahead of batchnorm, whose shift makes it redundant.
  generator_.add<nn::ConvTranspose2d>(config_.latent_dim, 4 * f, first, init, false);
  generator_.add<nn::BatchNorm>(4 * f);
  generator_.add<nn::ReLU>();
  generator_.add<nn::ConvTranspose2d>(4 * f, 2 * f, up, init, false);
  generator_.add<nn::BatchNorm>(2 * f);
  generator_.add<nn::ReLU>();
  generator_.add<nn::ConvTranspose2d>(2 * f, f, up, init, false);
  generator_.add<nn::BatchNorm>(f);
  generator_.add<nn::ReLU>();
  generator_.add<nn::ConvTranspose2d>(f, 1, up, init);
  generator_.add<nn::Sigmoid>();

  discriminator_.add<nn::Conv2d>(1, f, up, init, false);
  discriminator_.add<nn::BatchNorm>(f);
  discriminator_.add<nn::LeakyReLU>(0.2);
  discriminator_.add<nn::Conv2d>(f, 2 * f, up, init, false);
  discriminator_.add<nn::BatchNorm>(2 * f);
  discriminator_.add<nn::LeakyReLU>(0.2);
  discriminator_.add<nn::Conv2d>(2 * f, 4 * f, up, init, false);
  discriminator_.add<nn::BatchNorm>(4 * f);
  discriminator_.add<nn::LeakyReLU>(0.2);
  discriminator_.add<nn::Conv2d>(4 * f, 1, first, init);
}

Tensor Dcgan::generate(const Tensor& z) {
  if (z.rank() < 2 || z.dim(1) != config_.latent_dim || z.size() != z.dim(0) * config_.latent_dim)
    throw Error(ErrorKind::kShape, "dcgan: latent codes must be [N, " + std::to_string(config_.latent_dim) + "]");
  return generator_.forward(z.reshaped({z.dim(0), config_.latent_dim, 1, 1}));
}

Tensor Dcgan::discriminate(const Tensor& x) {
  nn::require_shape(x, {x.rank() == 4 ? x.dim(0) : 0, 1, config_.canvas_rows, config_.canvas_cols},
                    "dcgan discriminator input");
  const Tensor logits = discriminator_.forward(x);
  return logits.reshaped({x.dim(0)});
}

void Dcgan::set_training(bool training) {
  generator_.set_training(training);
  discriminator_.set_training(training);
}

nn::Checkpoint Dcgan::to_checkpoint() {
  nlohmann::json desc;
  desc["model"] = "dcgan";
  desc["config"] = config_;
  desc["row_labels"] = row_labels_;
  desc["architecture"] = {{"generator", generator_.describe()},
                          {"discriminator", discriminator_.describe() + " > sigmoid"}};
  nn::Checkpoint ckpt;
  ckpt.descriptor = desc.dump();
  for (auto* net : {&generator_, &discriminator_}) {
    for (auto* p : net->parameters()) ckpt.tensors.push_back(p->value);
    for (auto* b : net->buffers()) ckpt.tensors.push_back(*b);
  }
  return ckpt;
}

Dcgan Dcgan::from_checkpoint(const nn::Checkpoint& ckpt) {
  try {
    const auto desc = nlohmann::json::parse(ckpt.descriptor);
    if (desc.at("model").get<std::string>() != "dcgan")
      throw Error(ErrorKind::kData, "checkpoint does not hold a dcgan model");
    Dcgan model(desc.at("config").get<DcganConfig>(), desc.at("row_labels").get<std::vector<std::string>>());
    std::vector<Tensor*> targets;
    for (auto* net : {&model.generator_, &model.discriminator_}) {
      for (auto* p : net->parameters()) targets.push_back(&p->value);
      for (auto* b : net->buffers()) targets.push_back(b);
    }
    nn::restore_tensors(ckpt.tensors, targets);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kData, std::string("bad dcgan checkpoint descriptor: ") + e.what());
  }
}

GanTrainResult train_gan(std::span<const BitMatrix> data, const DcganConfig& config) {
  config.validate();
  if (data.size() < 2 * config.batch_size)
    throw Error(ErrorKind::kInvalidArgument, "train_gan: need at least 2 * batch_size = " +
                                                 std::to_string(2 * config.batch_size) + " samples, got " +
                                                 std::to_string(data.size()));
  for (const auto& m : data)
    if (m.rows != config.rows || m.cols != config.cols)
      throw Error(ErrorKind::kShape, "train_gan: sample shape does not match config rows x cols");

  GanTrainResult result{Dcgan(config, data.front().row_labels), {}, {}};
  Dcgan& model = result.model;
  Rng rng = Rng(config.seed).split(1);
  Rng trace_rng = Rng(config.seed).split(2);
  nn::AdamState adam_g, adam_d;
  auto& gen = model.generator();
  auto& disc = model.discriminator();
  const auto g_params = gen.parameters();
  const auto d_params = disc.parameters();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<BitVector> reference;
  if (config.trace_samples > 0) {
    std::vector<std::size_t> pick = order;
    trace_rng.shuffle(pick);
    pick.resize(std::min(pick.size(), config.trace_samples));
    for (auto i : pick) reference.push_back(BitVector::from_matrix(data[i]));
  }

  auto logit_grad = [](const std::vector<double>& g, std::size_t n) { return Tensor({n, 1, 1, 1}, g); };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    model.set_training(true);
    rng.shuffle(order);
    GanEpochStats st;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(order.size(), start + config.batch_size) - start;
      const Tensor real = canvas_batch(data, std::span(order).subspan(start, n), config.canvas_rows, config.canvas_cols);
      const Tensor fake = model.generate(normal_batch(n, config.latent_dim, rng));

      // Discriminator step; real and fake pass through as separate batches.
      for (auto* p : d_params) p->zero_grad();
      // Each forward caches activations, so its backward must follow it directly.
      const Tensor real_logits = model.discriminate(real);
      std::vector<double> real_grad(n);
      for (std::size_t i = 0; i < n; ++i) real_grad[i] = (nn::sigmoid(real_logits[i]) - 1.0) / static_cast<double>(n);
      disc.backward(logit_grad(real_grad, n));
      const Tensor fake_logits = model.discriminate(fake);
      GanLogitGradients dg;
      const GanLosses d_terms = gan_losses_from_logits(real_logits.values(), fake_logits.values(), &dg);
      disc.backward(logit_grad(dg.fake, n));
      nn::adam_step(d_params, adam_d, config.lr_discriminator);

      // Generator step through the updated discriminator on the same fakes.
      for (auto* p : g_params) p->zero_grad();
      const Tensor fake_logits2 = model.discriminate(fake);
      GanLogitGradients gg;
      const GanLosses g_terms = gan_losses_from_logits(real_logits.values(), fake_logits2.values(), &gg);
      const Tensor d_fake_input = disc.backward(logit_grad(gg.g_fake, n));
      gen.backward(d_fake_input);
      nn::adam_step(g_params, adam_g, config.lr_generator);

      st.d_loss += d_terms.d_loss;
      st.g_loss += g_terms.g_loss;
      st.d_real += mean_sigmoid(real_logits);
      st.d_fake += mean_sigmoid(fake_logits);
      ++batches;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    st.d_loss *= inv;
    st.g_loss *= inv;
    st.d_real *= inv;
    st.d_fake *= inv;
    result.stats.push_back(st);

    EpochTrace t;
    t.epoch = epoch;
    t.loss = st.g_loss;
    if (config.trace_samples > 0) {
      const auto synth = to_bit_vectors(generate_gan(model, config.trace_samples, trace_rng));
      t.metrics = score(reference, synth, trace_rng);
    }
    result.trace.push_back(t);
  }
  model.set_training(false);
  return result;
}

std::vector<BitMatrix> generate_gan(Dcgan& model, std::size_t n, Rng& rng) {
  const auto& cfg = model.config();
  model.set_training(false);
  std::vector<BitMatrix> out;
  out.reserve(n);
  const std::size_t canvas = cfg.canvas_rows * cfg.canvas_cols;
  for (std::size_t start = 0; start < n; start += kGenerateChunk) {
    const std::size_t count = std::min(kGenerateChunk, n - start);
    Tensor z({count, cfg.latent_dim});
    for (auto& v : z.values()) v = rng.normal();
    const Tensor probs = model.generate(z);
    for (std::size_t s = 0; s < count; ++s) {
      BitMatrix m(cfg.rows, cfg.cols);
      if (!model.row_labels().empty()) m.row_labels = model.row_labels();
      const double* img = probs.data() + s * canvas;
      for (std::size_t r = 0; r < cfg.rows; ++r)
        for (std::size_t c = 0; c < cfg.cols; ++c) m.at(r, c) = img[r * cfg.canvas_cols + c] > 0.5 ? 1 : 0;
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace hlsforge
