#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "hlsforge/adam.hpp"
#include "hlsforge/codec.hpp"
#include "hlsforge/error.hpp"
#include "hlsforge/gan.hpp"
#include "hlsforge/gradcheck.hpp"

using namespace hlsforge;
using nn::Tensor;

namespace {

DcganConfig small_config() {
  DcganConfig c;
  c.rows = 6;
  c.cols = 8;
  c.canvas_rows = 16;
  c.canvas_cols = 16;
  c.latent_dim = 3;
  c.feature_maps = 2;
  c.batch_size = 4;
  c.epochs = 2;
  c.trace_samples = 8;
  return c;
}

Tensor normal_tensor(nn::Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

Tensor logit_tensor(const std::vector<double>& g) { return Tensor({g.size(), 1, 1, 1}, g); }

}  // namespace

TEST_CASE("losses at an undecided discriminator") {
  const std::vector<double> half(5, 0.5);
  const GanLosses l = gan_losses(half, half);
  CHECK(l.d_loss == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(l.g_loss == doctest::Approx(std::log(2.0)));

  const std::vector<double> zero(5, 0.0);
  const GanLosses z = gan_losses(zero, zero);
  CHECK(std::isfinite(z.d_loss));
  CHECK(z.d_loss == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));

  const std::vector<double> logits0(5, 0.0);
  const GanLosses fl = gan_losses_from_logits(logits0, logits0);
  CHECK(fl.d_loss == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(fl.g_loss == doctest::Approx(std::log(2.0)));

  const std::vector<double> huge{800.0}, tiny{-800.0};
  const GanLosses extreme = gan_losses_from_logits(tiny, huge);
  CHECK(std::isfinite(extreme.d_loss));
  CHECK(extreme.d_loss == doctest::Approx(1600.0));

  CHECK_THROWS_AS(gan_losses(half, std::vector<double>(3, 0.5)), Error);
}

TEST_CASE("logit loss gradients") {
  Rng rng(2);
  std::vector<double> r(6), f(6);
  for (auto& v : r) v = 2.0 * rng.normal();
  for (auto& v : f) v = 2.0 * rng.normal();
  GanLogitGradients g;
  gan_losses_from_logits(r, f, &g);
  CHECK(nn::gradcheck([&] { return gan_losses_from_logits(r, f).d_loss; }, r, g.real) < 1e-4);
  CHECK(nn::gradcheck([&] { return gan_losses_from_logits(r, f).d_loss; }, f, g.fake) < 1e-4);
  CHECK(nn::gradcheck([&] { return gan_losses_from_logits(r, f).g_loss; }, f, g.g_fake) < 1e-4);
}

TEST_CASE("generator gradient through the discriminator") {
  Dcgan model(small_config());
  model.set_training(true);
  Rng rng(13);
  const Tensor z = normal_tensor({2, 3}, rng);
  const std::vector<double> real_logits(2, 0.0);

  auto g_loss = [&] {
    const Tensor logits = model.discriminate(model.generate(z));
    return gan_losses_from_logits(real_logits, logits.values()).g_loss;
  };
  model.generator().zero_grad();
  model.discriminator().zero_grad();
  const Tensor logits = model.discriminate(model.generate(z));
  GanLogitGradients g;
  gan_losses_from_logits(real_logits, logits.values(), &g);
  model.generator().backward(model.discriminator().backward(logit_tensor(g.g_fake)));

  double worst = 0.0;
  for (auto* p : model.generator().parameters()) {
    const Tensor analytic = p->grad;
    // The ReLU and LeakyReLU kinks of two stacked networks sit close enough
    // to some pre-activations that a 1e-4 stencil straddles them.
    worst = std::max(worst, nn::gradcheck(g_loss, p->value.values(), analytic.values(), 1e-6));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("architecture shapes") {
  DcganConfig cfg;
  cfg.feature_maps = 4;
  cfg.latent_dim = 8;
  Dcgan model(cfg);
  Rng rng(1);
  const Tensor x = model.generate(normal_tensor({3, 8}, rng));
  CHECK(x.shape() == nn::Shape{3, 1, 32, 32});
  for (double v : x.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(model.discriminate(x).shape() == nn::Shape{3});

  cfg.canvas_rows = 64;
  cfg.rows = 39;
  Dcgan tall(cfg);
  CHECK(tall.generate(normal_tensor({2, 8}, rng)).shape() == nn::Shape{2, 1, 64, 32});
}

TEST_CASE("rows that do not fit the canvas") {
  DcganConfig cfg;
  cfg.rows = 39;
  try {
    cfg.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("64-row canvas") != std::string::npos);
  }
}

TEST_CASE("pad and crop") {
  BitMatrix m(20, 32);
  Rng rng(4);
  for (auto& b : m.bits) b = rng.bernoulli(0.5);
  const BitMatrix p = pad_matrix(m, 32, 32);
  CHECK(p.rows == 32);
  for (std::size_t r = 20; r < 32; ++r)
    for (std::size_t c = 0; c < 32; ++c) CHECK(p.at(r, c) == 0);
  CHECK(crop_matrix(p, 20, 32).bits == m.bits);
  CHECK_THROWS_AS(pad_matrix(m, 16, 32), Error);
}

TEST_CASE("discriminator steps separate fixed real and fake batches") {
  Dcgan model(small_config());
  model.set_training(true);
  Rng rng(6);
  Tensor real({4, 1, 16, 16}, 0.0), fake({4, 1, 16, 16}, 0.0);
  for (std::size_t i = 0; i < real.size(); ++i) real[i] = (i % 3 == 0) ? 1.0 : 0.0;
  for (auto& v : fake.values()) v = rng.uniform();
  nn::AdamState adam;
  auto params = model.discriminator().parameters();
  auto& disc = model.discriminator();
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 30; ++step) {
    disc.zero_grad();
    const Tensor rl = model.discriminate(real);
    std::vector<double> rg(4);
    for (std::size_t i = 0; i < 4; ++i) rg[i] = (nn::sigmoid(rl[i]) - 1.0) / 4.0;
    disc.backward(logit_tensor(rg));
    const Tensor fl = model.discriminate(fake);
    GanLogitGradients g;
    const double d = gan_losses_from_logits(rl.values(), fl.values(), &g).d_loss;
    disc.backward(logit_tensor(g.fake));
    nn::adam_step(params, adam, 1e-2);
    if (step == 0) first = d;
    last = d;
  }
  CHECK(last < first);
}

TEST_CASE("reduced-scale training") {
  const Corpus corpus = testing::bimodal_corpus(24, 3);
  const auto data = encode_corpus(corpus);
  DcganConfig cfg;
  cfg.feature_maps = 4;
  cfg.latent_dim = 8;
  cfg.batch_size = 8;
  cfg.epochs = 2;
  cfg.trace_samples = 16;
  cfg.seed = 12;
  auto a = train_gan(data, cfg);
  auto b = train_gan(data, cfg);
  REQUIRE(a.trace.size() == 2);
  REQUIRE(a.stats.size() == 2);
  for (const auto& s : a.stats) {
    CHECK(std::isfinite(s.d_loss));
    CHECK(std::isfinite(s.g_loss));
    CHECK(s.d_real > 0.0);
    CHECK(s.d_real < 1.0);
  }
  CHECK(a.trace.back().loss == a.stats.back().g_loss);
  CHECK(a.model.to_checkpoint().tensors == b.model.to_checkpoint().tensors);

  Rng g1(8), g2(8);
  const auto s1 = generate_gan(a.model, 5, g1);
  REQUIRE(s1.size() == 5);
  CHECK(s1[0].rows == 20);
  CHECK(s1[0].cols == 32);
  CHECK(s1[0].row_labels == data[0].row_labels);

  auto restored = Dcgan::from_checkpoint(nn::deserialize_checkpoint(nn::serialize_checkpoint(a.model.to_checkpoint())));
  CHECK(generate_gan(restored, 5, g2) == s1);
}
