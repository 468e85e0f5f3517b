#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "hlsforge/baselines.hpp"
#include "hlsforge/codec.hpp"
#include "hlsforge/error.hpp"
#include "hlsforge/fidelity.hpp"

using namespace hlsforge;

namespace {

BitVector bits(std::initializer_list<std::uint8_t> b) { return BitVector(std::vector<std::uint8_t>(b)); }

std::vector<BitVector> bernoulli_set(std::size_t n, std::size_t len, double p, Rng& rng) {
  std::vector<BitVector> out;
  std::vector<std::uint8_t> b(len);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : b) x = rng.bernoulli(p);
    out.emplace_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("bit vector packing") {
  std::vector<std::uint8_t> b(130, 0);
  b[0] = b[64] = b[129] = 1;
  const BitVector v(b);
  CHECK(v.size() == 130);
  CHECK(v.popcount() == 3);
  CHECK(v.get(129));
  CHECK_FALSE(v.get(128));
  std::vector<std::uint8_t> c(130, 1);
  CHECK(hamming(v, BitVector(c)) == 127);
  CHECK(overlap(v, BitVector(c)) == 3);
}

TEST_CASE("mmd of a set with itself is zero") {
  Rng rng(1);
  const auto x = bernoulli_set(40, 64, 0.3, rng);
  CHECK(mmd(x, x) < 1e-7);
}

TEST_CASE("two-point mmd closed form") {
  // One pair at Hamming distance 4: the median heuristic gives 2 sigma^2 = 4.
  const std::vector<BitVector> x{bits({1, 1, 1, 1, 0, 0})}, y{bits({0, 0, 0, 0, 0, 0})};
  CHECK(mmd(x, y) == doctest::Approx(std::sqrt(2.0 - 2.0 * std::exp(-1.0))));
  CHECK(mmd(x, y) == mmd(y, x));

  // Identical points: median zero falls back to 2 sigma^2 = 2 and MMD is 0.
  CHECK(mmd(x, x) == 0.0);
}

TEST_CASE("mmd separates distributions") {
  Rng rng(2);
  const auto a = bernoulli_set(500, 640, 0.3, rng);
  const auto b = bernoulli_set(500, 640, 0.3, rng);
  const auto c = bernoulli_set(500, 640, 0.5, rng);
  // Same distribution: the V-statistic keeps its diagonal bias,
  // E[MMD^2] ~ (1/n + 1/m)(1 - E k(x, x')) with E k ~ exp(-1) at the median bandwidth.
  const double bias = std::sqrt(2.0 / 500.0 * (1.0 - std::exp(-1.0)));
  CHECK(mmd(a, b) == doctest::Approx(bias).epsilon(0.03));
  CHECK(mmd(a, c) > mmd(a, b));
  CHECK(mmd(a, b) == doctest::Approx(mmd(b, a)));
}

TEST_CASE("mmd input errors") {
  const std::vector<BitVector> x{bits({1, 0})}, y{bits({1, 0, 1})}, none;
  CHECK_THROWS_AS(mmd(x, y), Error);
  CHECK_THROWS_AS(mmd(x, none), Error);
}

TEST_CASE("paired metric examples") {
  const std::vector<BitVector> real{bits({1, 1, 0, 0})}, synth{bits({1, 0, 1, 0})};
  Rng rng(0);
  const PairedMetrics m = paired_metrics(real, synth, rng);
  CHECK(m.pairs == 1);
  CHECK(m.ssd == doctest::Approx(2.0));
  CHECK(m.prd == doctest::Approx(100.0));
  CHECK(m.coss == doctest::Approx(0.5));

  const std::vector<BitVector> comp{bits({0, 0, 1, 1})};
  const PairedMetrics c = paired_metrics(real, comp, rng);
  CHECK(c.coss == 0.0);
  CHECK(c.ssd == doctest::Approx(4.0));

  const PairedMetrics same = paired_metrics(real, real, rng);
  CHECK(same.ssd == 0.0);
  CHECK(same.prd == 0.0);
  CHECK(same.coss == doctest::Approx(1.0));

  const std::vector<BitVector> zero{bits({0, 0, 0, 0})};
  CHECK_THROWS_AS(paired_metrics(zero, real, rng), Error);
  // An all-zero synthetic vector has cosine 0 rather than NaN.
  CHECK(paired_metrics(real, zero, rng).coss == 0.0);
}

TEST_CASE("paired metrics use the shorter set and skip all-zero real vectors") {
  const std::vector<BitVector> real{bits({1, 0}), bits({0, 0}), bits({0, 1})};
  const std::vector<BitVector> synth{bits({1, 0}), bits({1, 0})};
  Rng rng(5);
  const PairedMetrics m = paired_metrics(real, synth, rng);
  CHECK(m.pairs == 2);
  CHECK(m.prd_skipped <= 1);
}

TEST_CASE("aggregation over runs") {
  FidelityMetrics a{0.1, 2.0, 50.0, 0.7, 0.0}, b{0.3, 4.0, 70.0, 0.9, 0.0};
  const auto r = aggregate("x", "id", {1, 2}, {a, b});
  CHECK(r.mean.mmd == doctest::Approx(0.2));
  CHECK(r.mean.coss == doctest::Approx(0.8));
  CHECK(r.stddev.ssd == doctest::Approx(std::sqrt(2.0)));
  const auto one = aggregate("x", "id", {1}, {a});
  CHECK(one.stddev == FidelityMetrics{});
  CHECK(one.mean == a);
}

TEST_CASE("report json roundtrip") {
  Rng rng(3);
  const auto real = bernoulli_set(30, 32, 0.4, rng);
  const auto report = evaluate_runs(
      [&](std::uint64_t seed) {
        Rng r(seed);
        return bernoulli_set(30, 32, 0.45, r);
      },
      real, 3, 100, "toy", corpus_fingerprint(real));
  CHECK(report.runs() == 3);
  CHECK(report.seeds == std::vector<std::uint64_t>{100, 101, 102});
  const FidelityReport back = report_from_json(report_to_json(report));
  CHECK(back == report);
  CHECK_THROWS_AS(report_from_json("{\"generator\": 3}"), Error);
}

TEST_CASE("evaluation is reproducible") {
  Rng rng(4);
  const auto real = bernoulli_set(30, 32, 0.4, rng);
  auto gen = [](std::uint64_t seed) {
    Rng r(seed);
    return bernoulli_set(30, 32, 0.5, r);
  };
  CHECK(report_to_json(evaluate_runs(gen, real, 2, 7)) == report_to_json(evaluate_runs(gen, real, 2, 7)));
}

TEST_CASE("fingerprint depends on content") {
  Rng rng(6);
  const auto a = bernoulli_set(10, 32, 0.5, rng);
  auto b = a;
  std::swap(b[0], b[1]);
  CHECK(corpus_fingerprint(a) == corpus_fingerprint(a));
  CHECK(corpus_fingerprint(a) != corpus_fingerprint(b));
}

TEST_CASE("a sample of the true distribution beats the independent gaussian") {
  const Corpus real = testing::bimodal_corpus(300, 1);
  const Corpus oracle = testing::bimodal_corpus(300, 2);
  Rng rng(3);
  const auto gauss = gaussian_generate(real, 300, rng);
  std::vector<BitMatrix> gm;
  for (const auto& s : gauss) gm.push_back(encode_sample(s, real.schema));
  const auto rv = to_bit_vectors(encode_corpus(real));
  CHECK(mmd(rv, to_bit_vectors(encode_corpus(oracle))) < mmd(rv, to_bit_vectors(gm)));
}

TEST_CASE("trace csv") {
  EpochTrace t;
  t.epoch = 1;
  t.loss = 2.5;
  const std::vector<EpochTrace> ts{t};
  const std::string csv = traces_to_csv(ts);
  CHECK(csv.rfind("epoch,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  const std::string empty = traces_to_csv({});
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);
}
