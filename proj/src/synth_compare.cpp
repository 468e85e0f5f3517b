#include "hlsforge/synth_compare.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "hlsforge/codec.hpp"
#include "hlsforge/error.hpp"
#include "json.hpp"

namespace hlsforge::dse {
namespace {

constexpr std::size_t kMetricCount = 6;
constexpr std::size_t kSampleChunk = 256;
constexpr std::size_t kMaxChunks = 64;

std::vector<VariableSchema> metric_schema() {
  return {{"cycles", "count", VariableKind::kInteger},      {"area_ff", "count", VariableKind::kInteger},
          {"area_lut", "count", VariableKind::kInteger},    {"critical_path", "ns", VariableKind::kReal},
          {"power", "mW", VariableKind::kReal},             {"clock_period", "ns", VariableKind::kReal}};
}

std::array<double, kMetricCount> metrics_of(const DesignAlternative& a) {
  return {static_cast<double>(a.cycles), static_cast<double>(a.area_ff), static_cast<double>(a.area_lut),
          a.critical_path, a.power, a.clock_period};
}

HlsSample sample_of(const DesignAlternative& a, const std::string& id) {
  HlsSample s;
  s.project_id = id;
  const auto m = metrics_of(a);
  s.values.assign(m.begin(), m.end());
  return s;
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Samples a trained model in chunks and sorts decoded samples into
// components by their component code until every quota is met.
template <typename Sample>
std::vector<std::vector<DesignAlternative>> fill_quotas(const SystemSpec& real, const Schema& schema, Sample&& sample) {
  std::vector<std::vector<DesignAlternative>> out(real.components.size());
  auto remaining = [&] {
    for (std::size_t c = 0; c < out.size(); ++c)
      if (out[c].size() < real.components[c].alternatives.size()) return true;
    return false;
  };
  for (std::size_t chunk = 0; chunk < kMaxChunks && remaining(); ++chunk) {
    for (const auto& m : sample(kSampleChunk)) {
      const DecodedSample d = decode_sample(m, schema);
      if (!d.valid) continue;
      const auto c = static_cast<std::size_t>(d.sample.directives.at(0).at(0));
      if (out[c].size() < real.components[c].alternatives.size())
        out[c].push_back(alternative_from_values(d.sample.values));
    }
  }
  return out;
}

}  // namespace

Corpus alternatives_corpus(const SystemSpec& spec) {
  spec.validate(false);
  Corpus corpus;
  corpus.schema.variables = metric_schema();
  Directive tag{"component", {{"id", {}}}};
  for (const auto& c : spec.components) tag.options[0].domain.push_back(c.name);
  if (tag.options[0].domain.size() > 16)
    throw Error(ErrorKind::kInvalidArgument, "at most 16 components fit the 4-bit component code");
  corpus.schema.directives = DirectiveSchema{{tag}};
  corpus.schema.validate();
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    for (std::size_t i = 0; i < spec.components[c].alternatives.size(); ++i) {
      HlsSample s = sample_of(spec.components[c].alternatives[i], spec.components[c].name + "-" + std::to_string(i));
      s.benchmark = spec.components[c].name;
      s.directives = {{static_cast<int>(c)}};
      corpus.samples.push_back(std::move(s));
    }
  }
  corpus.validate();
  return corpus;
}

Corpus component_corpus(const SystemSpec& spec, std::size_t component) {
  const Component& comp = spec.components.at(component);
  Corpus corpus;
  corpus.schema.variables = metric_schema();
  for (std::size_t i = 0; i < comp.alternatives.size(); ++i)
    corpus.samples.push_back(sample_of(comp.alternatives[i], comp.name + "-" + std::to_string(i)));
  corpus.validate();
  return corpus;
}

DesignAlternative alternative_from_values(std::span<const double> v) {
  if (v.size() != kMetricCount) throw Error(ErrorKind::kShape, "design alternative needs six metric values");
  auto count = [](double x) { return static_cast<std::uint64_t>(std::llround(std::max(0.0, x))); };
  return {count(v[0]), count(v[1]), count(v[2]), std::max(0.0, v[3]), std::max(0.0, v[4]), std::max(0.0, v[5])};
}

std::vector<std::vector<DesignAlternative>> synthesize_alternatives(const SystemSpec& real,
                                                                    const GeneratorDescriptor& generator,
                                                                    std::uint64_t seed) {
  const std::size_t ncomp = real.components.size();
  const std::string& kind = generator.kind;
  std::vector<std::vector<DesignAlternative>> out(ncomp);

  if (kind == "identity") {
    for (std::size_t c = 0; c < ncomp; ++c) out[c] = real.components[c].alternatives;
  } else if (kind == "gaussian" || kind == "abc") {
    for (std::size_t c = 0; c < ncomp; ++c) {
      const Corpus corpus = component_corpus(real, c);
      Rng rng = Rng(seed).split(c);
      const std::size_t n = real.components[c].alternatives.size();
      const auto samples =
          kind == "gaussian" ? gaussian_generate(corpus, n, rng) : abc_generate(corpus, n, rng, generator.abc);
      for (const auto& s : samples) out[c].push_back(alternative_from_values(s.values));
    }
  } else if (kind == "mlpvae" || kind == "dcgan") {
    const Corpus corpus = alternatives_corpus(real);
    const auto data = encode_corpus(corpus);
    Rng rng = Rng(seed).split(3);
    if (kind == "mlpvae") {
      MlpVaeConfig cfg = generator.mlpvae;
      cfg.trace_samples = 0;  // per-epoch traces are not kept here
      cfg.rows = data.front().rows;
      cfg.cols = data.front().cols;
      cfg.seed = seed;
      auto trained = train_vae(data, cfg);
      out = fill_quotas(real, corpus.schema, [&](std::size_t n) { return generate_vae(trained.model, n, rng); });
    } else {
      DcganConfig cfg = generator.dcgan;
      cfg.trace_samples = 0;  // per-epoch traces are not kept here
      cfg.rows = data.front().rows;
      cfg.cols = data.front().cols;
      cfg.seed = seed;
      auto trained = train_gan(data, cfg);
      out = fill_quotas(real, corpus.schema, [&](std::size_t n) { return generate_gan(trained.model, n, rng); });
    }
  } else {
    throw Error(ErrorKind::kInvalidArgument,
                "unknown generator '" + kind + "' (expected identity, gaussian, abc, mlpvae or dcgan)");
  }

  for (std::size_t c = 0; c < ncomp; ++c)
    if (out[c].empty())
      throw Error(ErrorKind::kData, "generator '" + kind + "' produced no alternatives for component '" +
                                        real.components[c].name + "'");
  return out;
}

std::size_t nearest_alternative(const Component& real, const DesignAlternative& synth) {
  std::array<double, kMetricCount> scale{};
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    std::vector<double> xs;
    for (const auto& a : real.alternatives) xs.push_back(metrics_of(a)[k]);
    const double sd = sample_stddev(xs);
    scale[k] = sd > 0.0 ? sd : 1.0;
  }
  const auto target = metrics_of(synth);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < real.alternatives.size(); ++i) {
    const auto m = metrics_of(real.alternatives[i]);
    double d = 0.0;
    for (std::size_t k = 0; k < kMetricCount; ++k) d += std::pow((m[k] - target[k]) / scale[k], 2);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

SynthCompareResult synth_system_compare(const SystemSpec& real, std::span<const GeneratorDescriptor> generators,
                                        std::span<const std::uint64_t> seeds, const GaConfig& ga) {
  real.validate();
  if (generators.empty() || seeds.empty())
    throw Error(ErrorKind::kInvalidArgument, "compare: need at least one generator and one seed");
  SynthCompareResult result;
  if (real.configuration_count() <= kBruteForceLimit) {
    result.reference = brute_force_explore(real);
  } else {
    GaConfig ref_cfg = ga;
    ref_cfg.seed = 0;
    result.reference = ga_explore(real, ref_cfg).front;
  }
  if (result.reference.empty()) throw Error(ErrorKind::kData, "compare: the real system has no feasible configuration");
  const auto reference = points_of(result.reference);

  for (const auto& gen : generators) {
    SynthCompareRow row;
    row.generator = gen.kind;
    std::vector<double> values;
    for (const auto seed : seeds) {
      SynthRun run;
      run.seed = seed;
      SystemSpec synth = real;
      const auto alts = synthesize_alternatives(real, gen, seed);
      for (std::size_t c = 0; c < synth.components.size(); ++c) synth.components[c].alternatives = alts[c];
      GaConfig cfg = ga;
      cfg.seed = seed;
      const DseReport explored = ga_explore(synth, cfg);

      std::vector<FrontEntry> realized;
      for (const auto& e : explored.front) {
        SystemConfiguration chosen(e.config.size());
        for (std::size_t c = 0; c < chosen.size(); ++c)
          chosen[c] = nearest_alternative(real.components[c], synth.components[c].alternatives[e.config[c]]);
        if (auto p = evaluate_config(chosen, real)) realized.push_back({chosen, *p});
      }
      if (realized.empty()) {
        run.adrs = std::numeric_limits<double>::infinity();
        run.diagnostic = explored.front.empty() ? "synthetic system has no feasible configuration: " + explored.diagnostic
                                                : "no synthetic choice is feasible on the real system";
      } else {
        const auto pts = points_of(realized);
        std::vector<ObjectivePoint> front;
        for (auto i : pareto_front(pts)) front.push_back(pts[i]);
        run.front_size = front.size();
        run.adrs = adrs(reference, front);
      }
      values.push_back(run.adrs);
      row.runs.push_back(std::move(run));
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / static_cast<double>(values.size());
    row.stddev = std::isfinite(row.mean) ? sample_stddev(values) : std::numeric_limits<double>::infinity();
    if (values.size() < 2) row.stddev = 0.0;
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string compare_to_json(const SynthCompareResult& result) {
  using nlohmann::json;
  // JSON has no infinity; an unreachable front is written as null.
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json doc;
  doc["reference_front"] = json::array();
  for (const auto& e : result.reference)
    doc["reference_front"].push_back({{"energy_nj", e.point.energy}, {"area", e.point.area}, {"choice", e.config}});
  doc["generators"] = json::array();
  for (const auto& row : result.rows) {
    json jr{{"generator", row.generator}, {"adrs_mean", num(row.mean)}, {"adrs_std", num(row.stddev)},
            {"adrs_mean_percent", num(row.mean * 100.0)}, {"runs", json::array()}};
    for (const auto& run : row.runs) {
      json r{{"seed", run.seed}, {"adrs", num(run.adrs)}, {"front_size", run.front_size}};
      if (!run.diagnostic.empty()) r["diagnostic"] = run.diagnostic;
      jr["runs"].push_back(std::move(r));
    }
    doc["generators"].push_back(std::move(jr));
  }
  return doc.dump(2) + "\n";
}

std::string compare_to_text(const SynthCompareResult& result) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %14s %12s  %s\n", "generator", "ADRS mean %", "std %", "per seed %");
  os << buf;
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof buf, "%-10s %14.1f %12.1f ", row.generator.c_str(), row.mean * 100.0, row.stddev * 100.0);
    os << buf;
    for (const auto& run : row.runs) {
      std::snprintf(buf, sizeof buf, " %.1f", run.adrs * 100.0);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace hlsforge::dse
