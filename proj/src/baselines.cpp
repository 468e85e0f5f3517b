#include "hlsforge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hlsforge/error.hpp"

namespace hlsforge {
namespace {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};

Moments moments(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return m;
}

// Sample indices grouped by benchmark when the schema declares directives,
// otherwise one group holding everything.
std::vector<std::pair<std::string, std::vector<std::size_t>>> groups_of(const Corpus& corpus) {
  if (corpus.samples.empty()) throw Error(ErrorKind::kInvalidArgument, "baseline: empty corpus");
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  if (!corpus.schema.directives) {
    out.emplace_back("", std::vector<std::size_t>(corpus.size()));
    for (std::size_t i = 0; i < corpus.size(); ++i) out.back().second[i] = i;
    return out;
  }
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string b = benchmark_of(corpus.samples[i]);
    auto [it, inserted] = slot.emplace(b, out.size());
    if (inserted) out.emplace_back(b, std::vector<std::size_t>{});
    out[it->second].second.push_back(i);
  }
  return out;
}

std::vector<double> column(const Corpus& corpus, const std::vector<std::size_t>& rows, std::size_t var) {
  std::vector<double> xs;
  xs.reserve(rows.size());
  for (auto i : rows) xs.push_back(corpus.samples[i].values[var]);
  return xs;
}

double finish_value(double v, const VariableSchema& var) {
  if (var.kind == VariableKind::kInteger) v = std::nearbyint(v);
  return std::clamp(v, var.min, var.max);
}

// Uniform option values for the directives the group's first sample applies.
std::vector<DirectiveSetting> draw_directives(const Corpus& corpus, const HlsSample& templ, Rng& rng) {
  std::vector<DirectiveSetting> out;
  if (!corpus.schema.directives || templ.directives.empty()) return out;
  const auto& dirs = corpus.schema.directives->directives;
  out.resize(dirs.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    if (templ.directives[d].empty()) continue;
    for (const auto& opt : dirs[d].options)
      out[d].push_back(static_cast<int>(rng.uniform_index(opt.domain.size())));
  }
  return out;
}

// Picks a group with probability proportional to its size.
std::size_t pick_group(const std::vector<std::pair<std::string, std::vector<std::size_t>>>& groups,
                       std::size_t total, Rng& rng) {
  std::size_t k = static_cast<std::size_t>(rng.uniform_index(total));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (k < groups[g].second.size()) return g;
    k -= groups[g].second.size();
  }
  return groups.size() - 1;
}

HlsSample blank_sample(const std::string& prefix, std::size_t k, const std::string& bench) {
  HlsSample s;
  s.project_id = prefix + "-" + std::to_string(k);
  s.benchmark = bench;
  return s;
}

}  // namespace

std::vector<HlsSample> gaussian_generate(const Corpus& corpus, std::size_t n, Rng& rng) {
  const auto groups = groups_of(corpus);
  const auto& vars = corpus.schema.variables;
  std::vector<std::vector<Moments>> fit(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t v = 0; v < vars.size(); ++v) fit[g].push_back(moments(column(corpus, groups[g].second, v)));

  std::vector<HlsSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t g = pick_group(groups, corpus.size(), rng);
    HlsSample s = blank_sample("gaussian", k, groups[g].first);
    for (std::size_t v = 0; v < vars.size(); ++v)
      s.values.push_back(finish_value(rng.normal(fit[g][v].mean, fit[g][v].stddev), vars[v]));
    s.directives = draw_directives(corpus, corpus.samples[groups[g].second.front()], rng);
    out.push_back(std::move(s));
  }
  return out;
}

void AbcConfig::validate() const {
  if (!(prior_width >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "abc: prior_width must be non-negative");
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "abc: epsilon must be non-negative");
  if (sim_batch < 2) throw Error(ErrorKind::kInvalidArgument, "abc: sim_batch must be at least 2");
  if (max_trials == 0 || posterior_size == 0)
    throw Error(ErrorKind::kInvalidArgument, "abc: max_trials and posterior_size must be positive");
}

AbcVariablePosterior abc_fit_variable(std::span<const double> observed, const AbcConfig& config, Rng& rng) {
  config.validate();
  const Moments target = moments(observed);
  // Constant columns have no spread to normalize by; fall back to the
  // magnitude of the mean so the tolerance stays relative.
  const double scale = target.stddev > 0.0 ? target.stddev : std::max(std::abs(target.mean), 1.0);
  const double mu_half = config.prior_width * std::abs(target.mean);
  const double sd_half = config.prior_width * target.stddev;

  AbcVariablePosterior post;
  std::vector<double> sim(config.sim_batch);
  while (post.trials < config.max_trials && post.mean.size() < config.posterior_size) {
    ++post.trials;
    const double mu = rng.uniform(target.mean - mu_half, target.mean + mu_half);
    const double sd = std::max(0.0, rng.uniform(target.stddev - sd_half, target.stddev + sd_half));
    for (auto& x : sim) x = rng.normal(mu, sd);
    const Moments got = moments(sim);
    const double dm = (got.mean - target.mean) / scale;
    const double ds = (got.stddev - target.stddev) / scale;
    const double dist = std::sqrt(dm * dm + ds * ds);
    post.best_distance = std::min(post.best_distance, dist);
    if (dist <= config.epsilon) {
      post.mean.push_back(mu);
      post.stddev.push_back(sd);
    }
  }
  return post;
}

std::vector<HlsSample> abc_generate(const Corpus& corpus, std::size_t n, Rng& rng, const AbcConfig& config) {
  config.validate();
  const auto groups = groups_of(corpus);
  const auto& vars = corpus.schema.variables;
  std::vector<std::vector<AbcVariablePosterior>> post(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const auto xs = column(corpus, groups[g].second, v);
      post[g].push_back(abc_fit_variable(xs, config, rng));
      const auto& p = post[g].back();
      if (p.mean.empty()) {
        std::string where = "variable '" + vars[v].name + "'";
        if (!groups[g].first.empty()) where += " of benchmark '" + groups[g].first + "'";
        throw Error(ErrorKind::kData, "abc: no parameter draw accepted for " + where + " after " +
                                          std::to_string(p.trials) + " trials (smallest distance " +
                                          format_real(p.best_distance) + ", epsilon " +
                                          format_real(config.epsilon) + ")");
      }
    }
  }

  std::vector<HlsSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t g = pick_group(groups, corpus.size(), rng);
    HlsSample s = blank_sample("abc", k, groups[g].first);
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const auto& p = post[g][v];
      const std::size_t j = static_cast<std::size_t>(rng.uniform_index(p.mean.size()));
      s.values.push_back(finish_value(rng.normal(p.mean[j], p.stddev[j]), vars[v]));
    }
    s.directives = draw_directives(corpus, corpus.samples[groups[g].second.front()], rng);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hlsforge
