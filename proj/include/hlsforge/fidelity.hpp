#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hlsforge/codec.hpp"
#include "hlsforge/rng.hpp"

namespace hlsforge {

// Packed binary vector; bit i of the flattened matrix is word i/64, bit i%64.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::span<const std::uint8_t> bits);
  static BitVector from_matrix(const BitMatrix& m) { return BitVector(m.bits); }

  std::size_t size() const { return length_; }
  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  std::size_t popcount() const;

  friend std::size_t hamming(const BitVector& a, const BitVector& b);
  friend std::size_t overlap(const BitVector& a, const BitVector& b);  // |a AND b|
  bool operator==(const BitVector&) const = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t length_ = 0;
};

std::vector<BitVector> to_bit_vectors(std::span<const BitMatrix> matrices);

// Biased (V-statistic) MMD with a Gaussian RBF kernel whose bandwidth is set
// by the median heuristic: 2 sigma^2 = median pooled pairwise squared
// distance (1.0 when that median is zero). Returns sqrt(max(0, MMD^2)).
double mmd(std::span<const BitVector> real, std::span<const BitVector> synth);
// Same estimator over real-valued vectors (value-space diagnostic).
double mmd_dense(std::span<const std::vector<double>> real, std::span<const std::vector<double>> synth);

struct PairedMetrics {
  double ssd = 0.0;
  double prd = 0.0;   // percent
  double coss = 0.0;
  std::size_t pairs = 0;
  std::size_t prd_skipped = 0;  // pairs whose real vector is all zero
};

// Both sets are shuffled independently, truncated to the shorter length and
// compared index by index. Throws when every real vector is all zero.
PairedMetrics paired_metrics(std::span<const BitVector> real, std::span<const BitVector> synth, Rng& rng);

struct FidelityMetrics {
  double mmd = 0.0;
  double ssd = 0.0;
  double prd = 0.0;
  double coss = 0.0;
  double value_mmd = 0.0;  // decoded-value diagnostic; 0 when not computed

  bool operator==(const FidelityMetrics&) const = default;
};

FidelityMetrics score(std::span<const BitVector> real, std::span<const BitVector> synth, Rng& rng);

struct FidelityReport {
  std::string generator;
  std::string corpus_id;
  std::vector<std::uint64_t> seeds;
  std::vector<FidelityMetrics> per_run;
  FidelityMetrics mean;
  FidelityMetrics stddev;  // sample standard deviation; 0 for a single run

  std::size_t runs() const { return per_run.size(); }
  bool operator==(const FidelityReport&) const = default;
};

FidelityReport aggregate(std::string generator, std::string corpus_id, std::vector<std::uint64_t> seeds,
                         std::vector<FidelityMetrics> per_run);

// One run: produce synthetic vectors for a seed.
using RunGenerator = std::function<std::vector<BitVector>(std::uint64_t seed)>;

// Seeds base_seed .. base_seed + runs - 1; pairing uses a stream split from
// each run's seed.
FidelityReport evaluate_runs(const RunGenerator& generate, std::span<const BitVector> real, std::size_t runs,
                             std::uint64_t base_seed, const std::string& generator = "",
                             const std::string& corpus_id = "");

// JSON document with every per-run value; parses back losslessly.
std::string report_to_json(const FidelityReport& report);
FidelityReport report_from_json(const std::string& text);

// Per-epoch record written as trace.csv rows.
struct EpochTrace {
  std::size_t epoch = 0;
  double loss = 0.0;
  FidelityMetrics metrics;
};

std::string traces_to_csv(std::span<const EpochTrace> traces);

// Fingerprint of an encoded corpus, used to check that reports compare the
// same real data.
std::string corpus_fingerprint(std::span<const BitVector> real);

}  // namespace hlsforge
