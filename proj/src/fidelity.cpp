#include "hlsforge/fidelity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hlsforge/dataset.hpp"
#include "hlsforge/error.hpp"
#include "json.hpp"

namespace hlsforge {
namespace {

using nlohmann::json;

double kernel_mean(const std::vector<double>& table, std::span<const BitVector> a, std::span<const BitVector> b,
                   bool same) {
  double acc = 0.0;
  if (same) {
    // Symmetric: diagonal contributes k(0) = 1 per element.
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = i + 1; j < a.size(); ++j) acc += table[hamming(a[i], a[j])];
    acc = 2.0 * acc + static_cast<double>(a.size());
  } else {
    for (const auto& x : a)
      for (const auto& y : b) acc += table[hamming(x, y)];
  }
  return acc / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

void require_nonempty_same_length(std::span<const BitVector> real, std::span<const BitVector> synth,
                                  const char* what) {
  if (real.empty() || synth.empty()) throw Error(ErrorKind::kInvalidArgument, std::string(what) + ": empty set");
  const std::size_t n = real.front().size();
  auto bad = [n](const BitVector& v) { return v.size() != n; };
  if (std::any_of(real.begin(), real.end(), bad) || std::any_of(synth.begin(), synth.end(), bad))
    throw Error(ErrorKind::kShape, std::string(what) + ": vectors differ in length");
}

json metrics_json(const FidelityMetrics& m) {
  return {{"mmd", m.mmd}, {"ssd", m.ssd}, {"prd", m.prd}, {"coss", m.coss}, {"value_mmd", m.value_mmd}};
}

FidelityMetrics metrics_from_json(const json& j) {
  FidelityMetrics m;
  m.mmd = j.at("mmd").get<double>();
  m.ssd = j.at("ssd").get<double>();
  m.prd = j.at("prd").get<double>();
  m.coss = j.at("coss").get<double>();
  m.value_mmd = j.value("value_mmd", 0.0);
  return m;
}

}  // namespace

BitVector::BitVector(std::span<const std::uint8_t> bits) : words_((bits.size() + 63) / 64, 0), length_(bits.size()) {
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) words_[i / 64] |= std::uint64_t{1} << (i % 64);
}

std::size_t BitVector::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t hamming(const BitVector& a, const BitVector& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.words_.size(); ++i) n += static_cast<std::size_t>(std::popcount(a.words_[i] ^ b.words_[i]));
  return n;
}

std::size_t overlap(const BitVector& a, const BitVector& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.words_.size(); ++i) n += static_cast<std::size_t>(std::popcount(a.words_[i] & b.words_[i]));
  return n;
}

std::vector<BitVector> to_bit_vectors(std::span<const BitMatrix> matrices) {
  std::vector<BitVector> out;
  out.reserve(matrices.size());
  for (const auto& m : matrices) out.push_back(BitVector::from_matrix(m));
  return out;
}

double mmd(std::span<const BitVector> real, std::span<const BitVector> synth) {
  require_nonempty_same_length(real, synth, "mmd");
  const std::size_t len = real.front().size();

  // Squared Euclidean distance between binary vectors is the Hamming
  // distance, so the pooled distance distribution is an integer histogram.
  std::vector<BitVector> pooled(real.begin(), real.end());
  pooled.insert(pooled.end(), synth.begin(), synth.end());
  std::vector<std::uint64_t> hist(len + 1, 0);
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = i + 1; j < pooled.size(); ++j) ++hist[hamming(pooled[i], pooled[j])];
  const std::uint64_t npairs = pooled.size() * (pooled.size() - 1) / 2;

  double median = 0.0;
  if (npairs > 0) {
    // Average of the two middle order statistics (equal for odd counts).
    auto order_stat = [&](std::uint64_t k) {
      std::uint64_t seen = 0;
      for (std::size_t d = 0; d <= len; ++d) {
        seen += hist[d];
        if (seen > k) return static_cast<double>(d);
      }
      return static_cast<double>(len);
    };
    median = 0.5 * (order_stat((npairs - 1) / 2) + order_stat(npairs / 2));
  }
  const double two_sigma_sq = median > 0.0 ? median : 2.0;  // sigma fallback 1.0

  std::vector<double> table(len + 1);
  for (std::size_t d = 0; d <= len; ++d) table[d] = std::exp(-static_cast<double>(d) / two_sigma_sq);

  const double kxx = kernel_mean(table, real, real, true);
  const double kyy = kernel_mean(table, synth, synth, true);
  const double kxy = kernel_mean(table, real, synth, false);
  return std::sqrt(std::max(0.0, kxx + kyy - 2.0 * kxy));
}

double mmd_dense(std::span<const std::vector<double>> real, std::span<const std::vector<double>> synth) {
  if (real.empty() || synth.empty()) throw Error(ErrorKind::kInvalidArgument, "mmd: empty set");
  std::vector<const std::vector<double>*> pooled;
  for (const auto& v : real) pooled.push_back(&v);
  for (const auto& v : synth) pooled.push_back(&v);
  const std::size_t n = pooled.size();
  const std::size_t dim = real.front().size();
  for (const auto* v : pooled)
    if (v->size() != dim) throw Error(ErrorKind::kShape, "mmd: vectors differ in length");

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = (*pooled[i])[k] - (*pooled[j])[k];
        d += diff * diff;
      }
      dist[i * n + j] = dist[j * n + i] = d;
    }
  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(dist[i * n + j]);
  double median = 0.0;
  if (!upper.empty()) {
    const std::size_t lo = (upper.size() - 1) / 2, hi = upper.size() / 2;
    std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(hi), upper.end());
    const double hi_val = upper[hi];
    std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(lo), upper.end());
    median = 0.5 * (upper[lo] + hi_val);
  }
  const double two_sigma_sq = median > 0.0 ? median : 2.0;
  const std::size_t nr = real.size();
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double k = std::exp(-dist[i * n + j] / two_sigma_sq);
      if (i < nr && j < nr) kxx += k;
      else if (i >= nr && j >= nr) kyy += k;
      else if (i < nr) kxy += k;
    }
  const double ns = static_cast<double>(synth.size()), nrd = static_cast<double>(nr);
  return std::sqrt(std::max(0.0, kxx / (nrd * nrd) + kyy / (ns * ns) - 2.0 * kxy / (nrd * ns)));
}

PairedMetrics paired_metrics(std::span<const BitVector> real, std::span<const BitVector> synth, Rng& rng) {
  require_nonempty_same_length(real, synth, "paired_metrics");
  std::vector<std::size_t> ri(real.size()), si(synth.size());
  std::iota(ri.begin(), ri.end(), 0);
  std::iota(si.begin(), si.end(), 0);
  rng.shuffle(ri);
  rng.shuffle(si);
  const std::size_t n = std::min(ri.size(), si.size());

  PairedMetrics out;
  out.pairs = n;
  double ssd = 0.0, prd = 0.0, coss = 0.0;
  std::size_t prd_pairs = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& x = real[ri[k]];
    const auto& y = synth[si[k]];
    const double d = static_cast<double>(hamming(x, y));
    const double nx = static_cast<double>(x.popcount());
    const double ny = static_cast<double>(y.popcount());
    ssd += d;
    if (nx > 0.0) {
      prd += 100.0 * std::sqrt(d / nx);
      ++prd_pairs;
    } else {
      ++out.prd_skipped;
    }
    if (nx > 0.0 && ny > 0.0) coss += static_cast<double>(overlap(x, y)) / std::sqrt(nx * ny);
  }
  if (prd_pairs == 0) throw Error(ErrorKind::kData, "prd undefined: every paired real vector is all zero");
  out.ssd = ssd / static_cast<double>(n);
  out.prd = prd / static_cast<double>(prd_pairs);
  out.coss = coss / static_cast<double>(n);
  return out;
}

FidelityMetrics score(std::span<const BitVector> real, std::span<const BitVector> synth, Rng& rng) {
  FidelityMetrics m;
  m.mmd = mmd(real, synth);
  const auto p = paired_metrics(real, synth, rng);
  m.ssd = p.ssd;
  m.prd = p.prd;
  m.coss = p.coss;
  return m;
}

FidelityReport aggregate(std::string generator, std::string corpus_id, std::vector<std::uint64_t> seeds,
                         std::vector<FidelityMetrics> per_run) {
  if (per_run.empty()) throw Error(ErrorKind::kInvalidArgument, "aggregate: no runs");
  FidelityReport r;
  r.generator = std::move(generator);
  r.corpus_id = std::move(corpus_id);
  r.seeds = std::move(seeds);
  r.per_run = std::move(per_run);
  const double n = static_cast<double>(r.per_run.size());
  auto stats = [&](double FidelityMetrics::*field, double& mean, double& sd) {
    double acc = 0.0;
    for (const auto& m : r.per_run) acc += m.*field;
    mean = acc / n;
    double sq = 0.0;
    for (const auto& m : r.per_run) sq += (m.*field - mean) * (m.*field - mean);
    sd = r.per_run.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  };
  stats(&FidelityMetrics::mmd, r.mean.mmd, r.stddev.mmd);
  stats(&FidelityMetrics::ssd, r.mean.ssd, r.stddev.ssd);
  stats(&FidelityMetrics::prd, r.mean.prd, r.stddev.prd);
  stats(&FidelityMetrics::coss, r.mean.coss, r.stddev.coss);
  stats(&FidelityMetrics::value_mmd, r.mean.value_mmd, r.stddev.value_mmd);
  return r;
}

FidelityReport evaluate_runs(const RunGenerator& generate, std::span<const BitVector> real, std::size_t runs,
                             std::uint64_t base_seed, const std::string& generator,
                             const std::string& corpus_id) {
  if (runs == 0) throw Error(ErrorKind::kInvalidArgument, "evaluate_runs: runs must be at least 1");
  std::vector<std::uint64_t> seeds;
  std::vector<FidelityMetrics> per_run;
  for (std::size_t k = 0; k < runs; ++k) {
    const std::uint64_t seed = base_seed + k;
    const auto synth = generate(seed);
    Rng pairing = Rng(seed).split(0x9a1e);
    per_run.push_back(score(real, synth, pairing));
    seeds.push_back(seed);
  }
  return aggregate(generator, corpus_id.empty() ? corpus_fingerprint(real) : corpus_id, std::move(seeds),
                   std::move(per_run));
}

std::string report_to_json(const FidelityReport& report) {
  json doc;
  doc["generator"] = report.generator;
  doc["corpus_id"] = report.corpus_id;
  doc["runs"] = report.runs();
  doc["seeds"] = report.seeds;
  doc["mean"] = metrics_json(report.mean);
  doc["std"] = metrics_json(report.stddev);
  doc["per_run"] = json::array();
  for (const auto& m : report.per_run) doc["per_run"].push_back(metrics_json(m));
  return doc.dump(2) + "\n";
}

FidelityReport report_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    FidelityReport r;
    r.generator = doc.at("generator").get<std::string>();
    r.corpus_id = doc.at("corpus_id").get<std::string>();
    r.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& m : doc.at("per_run")) r.per_run.push_back(metrics_from_json(m));
    r.mean = metrics_from_json(doc.at("mean"));
    r.stddev = metrics_from_json(doc.at("std"));
    if (doc.at("runs").get<std::size_t>() != r.per_run.size())
      throw Error(ErrorKind::kData, "report run count does not match per-run entries");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kData, std::string("malformed report: ") + e.what());
  }
}

std::string traces_to_csv(std::span<const EpochTrace> traces) {
  std::ostringstream out;
  out << "epoch,mmd,ssd,prd,coss,loss\n";
  for (const auto& t : traces) {
    out << t.epoch << ',' << format_real(t.metrics.mmd) << ',' << format_real(t.metrics.ssd) << ','
        << format_real(t.metrics.prd) << ',' << format_real(t.metrics.coss) << ',' << format_real(t.loss) << '\n';
  }
  return out.str();
}

std::string corpus_fingerprint(std::span<const BitVector> real) {
  // FNV-1a over the bit contents.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(real.size());
  for (const auto& v : real) {
    mix(v.size());
    for (std::size_t i = 0; i < v.size(); i += 64) {
      std::uint64_t w = 0;
      for (std::size_t b = i; b < std::min(v.size(), i + 64); ++b) w |= std::uint64_t{v.get(b)} << (b - i);
      mix(w);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hlsforge
