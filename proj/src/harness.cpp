#include "hlsforge/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hlsforge/checkpoint.hpp"
#include "hlsforge/codec.hpp"
#include "hlsforge/config_io.hpp"
#include "hlsforge/error.hpp"

namespace hlsforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
}

std::vector<HlsSample> decode_all(std::span<const BitMatrix> matrices, const Schema& schema) {
  std::vector<HlsSample> out;
  out.reserve(matrices.size());
  for (const auto& m : matrices) out.push_back(decode_sample(m, schema).sample);
  return out;
}

// Removes what a failed experiment created, leaving prior contents alone.
class OutputGuard {
 public:
  explicit OutputGuard(const fs::path& root) : root_(root), existed_(fs::exists(root)) {
    fs::create_directories(root_);
  }
  void track(const fs::path& p) { created_.push_back(p); }
  void commit() { committed_ = true; }
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    if (!existed_) {
      fs::remove_all(root_, ec);
      return;
    }
    for (const auto& p : created_) fs::remove_all(p, ec);
  }

 private:
  fs::path root_;
  bool existed_;
  bool committed_ = false;
  std::vector<fs::path> created_;
};

const char* kColumns[] = {"MMD", "SSD", "PRD%", "COSS"};

double metric(const FidelityMetrics& m, std::size_t col) {
  switch (col) {
    case 0: return m.mmd;
    case 1: return m.ssd;
    case 2: return m.prd;
    default: return m.coss;
  }
}

}  // namespace

void RunConfig::validate() const {
  if (runs == 0) throw Error(ErrorKind::kInvalidArgument, "run config: runs must be at least 1");
  if (generator != "mlpvae" && generator != "dcgan" && generator != "gaussian" && generator != "abc")
    throw Error(ErrorKind::kInvalidArgument,
                "run config: unknown generator '" + generator + "' (expected mlpvae, dcgan, gaussian or abc)");
  if (out.empty()) throw Error(ErrorKind::kInvalidArgument, "run config: output directory required");
  if (generator == "abc") abc.validate();
}

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
  RunConfig cfg;
  try {
    const json doc = json::parse(json_text);
    for (const auto& [key, value] : doc.items()) {
      static const char* known[] = {"corpus", "schema", "generator", "runs", "base_seed", "samples", "out", "model"};
      if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
        throw Error(ErrorKind::kSchema, "run config: unknown key '" + key + "'");
    }
    auto path = [&](const char* key) {
      const fs::path p = doc.at(key).get<std::string>();
      return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    cfg.corpus = path("corpus");
    cfg.schema = path("schema");
    cfg.out = path("out");
    cfg.generator = doc.at("generator").get<std::string>();
    cfg.runs = doc.value("runs", cfg.runs);
    cfg.base_seed = doc.value("base_seed", cfg.base_seed);
    cfg.samples = doc.value("samples", cfg.samples);
    if (doc.contains("model")) {
      const json& model = doc.at("model");
      if (cfg.generator == "mlpvae") cfg.mlpvae = model.get<MlpVaeConfig>();
      else if (cfg.generator == "dcgan") cfg.dcgan = model.get<DcganConfig>();
      else if (cfg.generator == "abc") cfg.abc = model.get<AbcConfig>();
      else if (!model.empty()) throw Error(ErrorKind::kSchema, "run config: generator '" + cfg.generator + "' takes no model settings");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("run config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open run config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

double value_space_mmd(const Corpus& real, std::span<const HlsSample> synth) {
  const std::size_t nvar = real.schema.variables.size();
  std::vector<double> lo(nvar, INFINITY), hi(nvar, -INFINITY);
  for (const auto& s : real.samples)
    for (std::size_t v = 0; v < nvar; ++v) {
      lo[v] = std::min(lo[v], s.values[v]);
      hi[v] = std::max(hi[v], s.values[v]);
    }
  auto scaled = [&](const HlsSample& s) {
    std::vector<double> x(nvar);
    for (std::size_t v = 0; v < nvar; ++v) {
      const double range = hi[v] > lo[v] ? hi[v] - lo[v] : 1.0;
      x[v] = (s.values.at(v) - lo[v]) / range;
    }
    return x;
  };
  std::vector<std::vector<double>> a, b;
  for (const auto& s : real.samples) a.push_back(scaled(s));
  for (const auto& s : synth) b.push_back(scaled(s));
  return mmd_dense(a, b);
}

FidelityReport run_experiment(const RunConfig& cfg) {
  cfg.validate();
  return run_experiment(load_corpus(cfg.corpus, cfg.schema), cfg);
}

FidelityReport run_experiment(const Corpus& corpus, const RunConfig& cfg) {
  cfg.validate();
  corpus.validate();
  if (corpus.samples.empty()) throw Error(ErrorKind::kData, "empty corpus");
  const auto real_matrices = encode_corpus(corpus);
  const auto real = to_bit_vectors(real_matrices);
  const std::string corpus_id = corpus_fingerprint(real);
  const std::size_t n = cfg.samples ? cfg.samples : corpus.size();

  OutputGuard guard(cfg.out);
  std::vector<std::uint64_t> seeds;
  std::vector<FidelityMetrics> per_run;
  for (std::size_t k = 0; k < cfg.runs; ++k) {
    const std::uint64_t seed = cfg.base_seed + k;
    const fs::path dir = cfg.out / ("run" + std::to_string(k));
    guard.track(dir);
    fs::create_directories(dir);

    std::vector<BitMatrix> synth_matrices;
    std::vector<HlsSample> synth_samples;
    Rng gen_rng = Rng(seed).split(3);
    if (cfg.generator == "mlpvae") {
      MlpVaeConfig mc = cfg.mlpvae;
      mc.rows = real_matrices.front().rows;
      mc.cols = real_matrices.front().cols;
      mc.seed = seed;
      auto trained = train_vae(real_matrices, mc);
      nn::save_checkpoint(trained.model.to_checkpoint(), dir / "checkpoint");
      write_text(dir / "trace.csv", traces_to_csv(trained.trace));
      synth_matrices = generate_vae(trained.model, n, gen_rng);
    } else if (cfg.generator == "dcgan") {
      DcganConfig gc = cfg.dcgan;
      gc.rows = real_matrices.front().rows;
      gc.cols = real_matrices.front().cols;
      gc.seed = seed;
      auto trained = train_gan(real_matrices, gc);
      nn::save_checkpoint(trained.model.to_checkpoint(), dir / "checkpoint");
      write_text(dir / "trace.csv", traces_to_csv(trained.trace));
      synth_matrices = generate_gan(trained.model, n, gen_rng);
    } else {
      synth_samples = cfg.generator == "gaussian" ? gaussian_generate(corpus, n, gen_rng)
                                                  : abc_generate(corpus, n, gen_rng, cfg.abc);
      for (const auto& s : synth_samples) synth_matrices.push_back(encode_sample(s, corpus.schema));
      write_text(dir / "trace.csv", traces_to_csv({}));
    }
    if (synth_samples.empty()) synth_samples = decode_all(synth_matrices, corpus.schema);

    Rng pairing = Rng(seed).split(0x9a1e);
    FidelityMetrics m = score(real, to_bit_vectors(synth_matrices), pairing);
    m.value_mmd = value_space_mmd(corpus, synth_samples);
    per_run.push_back(m);
    seeds.push_back(seed);
  }
  FidelityReport report = aggregate(cfg.generator, corpus_id, std::move(seeds), std::move(per_run));
  guard.track(cfg.out / "report");
  write_text(cfg.out / "report", report_to_json(report));
  guard.commit();
  return report;
}

ComparisonTable compare_table(std::span<const FidelityReport> reports) {
  if (reports.size() < 2) throw Error(ErrorKind::kInvalidArgument, "compare: need at least two reports");
  ComparisonTable t;
  t.corpus_id = reports.front().corpus_id;
  for (const auto& r : reports) {
    if (r.corpus_id != t.corpus_id)
      throw Error(ErrorKind::kData, "compare: report '" + r.generator + "' was scored on corpus " + r.corpus_id +
                                        ", expected " + t.corpus_id);
    t.generators.push_back(r.generator);
    t.mean.push_back(r.mean);
    t.stddev.push_back(r.stddev);
  }
  t.best.assign(4, std::vector<bool>(reports.size(), false));
  for (std::size_t col = 0; col < 4; ++col) {
    const bool higher_is_better = col == 3;
    double best = metric(t.mean[0], col);
    for (const auto& m : t.mean) best = higher_is_better ? std::max(best, metric(m, col)) : std::min(best, metric(m, col));
    for (std::size_t row = 0; row < t.mean.size(); ++row) t.best[col][row] = metric(t.mean[row], col) == best;
  }
  return t;
}

std::string table_to_text(const ComparisonTable& t) {
  std::ostringstream os;
  os << "| generator |";
  for (const char* c : kColumns) os << ' ' << c << " |";
  os << "\n|---|---|---|---|---|\n";
  char buf[96];
  for (std::size_t row = 0; row < t.generators.size(); ++row) {
    os << "| " << t.generators[row] << " |";
    for (std::size_t col = 0; col < 4; ++col) {
      std::snprintf(buf, sizeof buf, " %.3f ± %.3f", metric(t.mean[row], col), metric(t.stddev[row], col));
      os << buf << (t.best[col][row] ? " *" : "") << " |";
    }
    os << '\n';
  }
  os << "\n* best in column (highest COSS, lowest otherwise); corpus " << t.corpus_id << '\n';
  return os.str();
}

std::string table_to_json(const ComparisonTable& t) {
  json doc;
  doc["corpus_id"] = t.corpus_id;
  doc["rows"] = json::array();
  for (std::size_t row = 0; row < t.generators.size(); ++row) {
    json jr{{"generator", t.generators[row]}};
    for (std::size_t col = 0; col < 4; ++col)
      jr[kColumns[col]] = {{"mean", metric(t.mean[row], col)},
                           {"std", metric(t.stddev[row], col)},
                           {"best", static_cast<bool>(t.best[col][row])}};
    doc["rows"].push_back(std::move(jr));
  }
  return doc.dump(2) + "\n";
}

}  // namespace hlsforge
