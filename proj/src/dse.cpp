#include "hlsforge/dse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hlsforge/dataset.hpp"
#include "hlsforge/error.hpp"
#include "hlsforge/rng.hpp"
#include "json.hpp"

namespace hlsforge::dse {
namespace {

using nlohmann::json;

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
  return a.energy <= b.energy && a.area <= b.area && (a.energy < b.energy || a.area < b.area);
}

void check_config(const SystemConfiguration& cfg, const SystemSpec& spec) {
  if (cfg.size() != spec.components.size())
    throw Error(ErrorKind::kInvalidArgument, "configuration has " + std::to_string(cfg.size()) +
                                                 " genes for " + std::to_string(spec.components.size()) +
                                                 " components");
  for (std::size_t c = 0; c < cfg.size(); ++c)
    if (cfg[c] >= spec.components[c].alternatives.size())
      throw Error(ErrorKind::kInvalidArgument, "alternative index out of range for component '" +
                                                   spec.components[c].name + "'");
}

struct Individual {
  SystemConfiguration genes;
  double violation = 0.0;
  ObjectivePoint point;
  std::size_t rank = 0;
  double crowding = 0.0;
};

class Evaluator {
 public:
  explicit Evaluator(const SystemSpec& spec) : spec_(spec) {}

  void evaluate(Individual& ind) {
    auto it = cache_.find(ind.genes);
    if (it == cache_.end()) {
      const double v = constraint_violation(ind.genes, spec_);
      ObjectivePoint p;
      if (v == 0.0) p = *evaluate_config(ind.genes, spec_);
      it = cache_.emplace(ind.genes, std::make_pair(v, p)).first;
    }
    ind.violation = it->second.first;
    ind.point = it->second.second;
  }
  std::size_t evaluations() const { return cache_.size(); }

 private:
  const SystemSpec& spec_;
  std::map<SystemConfiguration, std::pair<double, ObjectivePoint>> cache_;
};

// Assigns constraint-dominated ranks and crowding distances in place.
void rank_population(std::vector<Individual>& pop) {
  std::vector<std::size_t> feasible, infeasible;
  for (std::size_t i = 0; i < pop.size(); ++i) (pop[i].violation == 0.0 ? feasible : infeasible).push_back(i);

  // Fast non-dominated sort over the feasible part.
  std::vector<std::vector<std::size_t>> dominated(pop.size());
  std::vector<std::size_t> count(pop.size(), 0);
  std::vector<std::size_t> current;
  for (auto i : feasible) {
    for (auto j : feasible) {
      if (dominates(pop[i].point, pop[j].point))
        dominated[i].push_back(j);
      else if (dominates(pop[j].point, pop[i].point))
        ++count[i];
    }
    if (count[i] == 0) current.push_back(i);
  }
  std::size_t rank = 0;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto i : current) {
      pop[i].rank = rank;
      for (auto j : dominated[i])
        if (--count[j] == 0) next.push_back(j);
    }
    // Crowding distance within the front.
    for (auto i : current) pop[i].crowding = 0.0;
    for (int k = 0; k < 2; ++k) {
      auto obj = [&](std::size_t i) { return k == 0 ? pop[i].point.energy : pop[i].point.area; };
      std::vector<std::size_t> f = current;
      std::sort(f.begin(), f.end(), [&](auto a, auto b) { return obj(a) < obj(b) || (obj(a) == obj(b) && a < b); });
      const double span = obj(f.back()) - obj(f.front());
      pop[f.front()].crowding = pop[f.back()].crowding = std::numeric_limits<double>::infinity();
      if (span <= 0.0) continue;
      for (std::size_t m = 1; m + 1 < f.size(); ++m) pop[f[m]].crowding += (obj(f[m + 1]) - obj(f[m - 1])) / span;
    }
    current = std::move(next);
    ++rank;
  }

  // Infeasible individuals follow in order of violation; equal violations share a rank.
  std::sort(infeasible.begin(), infeasible.end(),
            [&](auto a, auto b) { return pop[a].violation < pop[b].violation || (pop[a].violation == pop[b].violation && a < b); });
  for (std::size_t m = 0; m < infeasible.size(); ++m) {
    if (m > 0 && pop[infeasible[m]].violation != pop[infeasible[m - 1]].violation) ++rank;
    pop[infeasible[m]].rank = rank;
    pop[infeasible[m]].crowding = 0.0;
  }
}

bool better(const Individual& a, const Individual& b) {
  return a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding);
}

SystemConfiguration random_genes(const SystemSpec& spec, Rng& rng) {
  SystemConfiguration g(spec.components.size());
  for (std::size_t c = 0; c < g.size(); ++c) g[c] = rng.uniform_index(spec.components[c].alternatives.size());
  return g;
}

std::vector<FrontEntry> sorted_front(std::vector<FrontEntry> front) {
  std::sort(front.begin(), front.end(), [](const FrontEntry& a, const FrontEntry& b) {
    if (a.point.energy != b.point.energy) return a.point.energy < b.point.energy;
    if (a.point.area != b.point.area) return a.point.area < b.point.area;
    return a.config < b.config;
  });
  return front;
}

std::string infeasible_diagnostic(const SystemSpec& spec) {
  std::ostringstream os;
  os << "no feasible configuration found";
  for (const auto& c : spec.components) {
    bool any = false;
    for (const auto& a : c.alternatives)
      any = any || (static_cast<double>(a.cycles) * a.clock_period <= c.deadline && a.critical_path <= a.clock_period);
    if (!any) os << "; component '" << c.name << "' has no alternative meeting its deadline";
  }
  return os.str();
}

json alternative_json(const DesignAlternative& a) {
  return {{"cycles", a.cycles},
          {"area_ff", a.area_ff},
          {"area_lut", a.area_lut},
          {"critical_path", a.critical_path},
          {"power", a.power},
          {"clock_period", a.clock_period}};
}

}  // namespace

void SystemSpec::validate(bool require_timing) const {
  if (components.empty()) throw Error(ErrorKind::kSchema, "system spec: no components");
  if (max_distinct_frequencies == 0) throw Error(ErrorKind::kSchema, "system spec: max_distinct_frequencies must be >= 1");
  std::set<std::string> names;
  for (const auto& c : components) {
    if (!names.insert(c.name).second) throw Error(ErrorKind::kSchema, "system spec: duplicate component '" + c.name + "'");
    if (!(c.deadline > 0.0) || !std::isfinite(c.deadline))
      throw Error(ErrorKind::kSchema, "component '" + c.name + "': deadline must be positive");
    if (c.alternatives.empty()) throw Error(ErrorKind::kSchema, "component '" + c.name + "': no alternatives");
    for (std::size_t i = 0; i < c.alternatives.size(); ++i) {
      const auto& a = c.alternatives[i];
      const std::string where = "component '" + c.name + "' alternative " + std::to_string(i);
      for (double v : {a.critical_path, a.power, a.clock_period})
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::kSchema, where + ": metrics must be finite and non-negative");
      if (require_timing && a.critical_path > a.clock_period)
        throw Error(ErrorKind::kSchema, where + ": critical path " + format_real(a.critical_path) +
                                            " ns exceeds clock period " + format_real(a.clock_period) + " ns");
    }
  }
}

std::uint64_t SystemSpec::configuration_count() const {
  std::uint64_t n = 1;
  for (const auto& c : components) {
    const std::uint64_t k = c.alternatives.size();
    if (k == 0) return 0;
    if (n > std::numeric_limits<std::uint64_t>::max() / k) return std::numeric_limits<std::uint64_t>::max();
    n *= k;
  }
  return n;
}

double constraint_violation(const SystemConfiguration& cfg, const SystemSpec& spec) {
  check_config(cfg, spec);
  double v = 0.0;
  std::vector<double> periods;
  for (std::size_t c = 0; c < cfg.size(); ++c) {
    const auto& comp = spec.components[c];
    const auto& a = comp.alternatives[cfg[c]];
    const double latency = static_cast<double>(a.cycles) * a.clock_period;
    if (latency > comp.deadline) v += (latency - comp.deadline) / comp.deadline;
    if (a.critical_path > a.clock_period)
      v += (a.critical_path - a.clock_period) / std::max(a.clock_period, 1e-9);
    periods.push_back(a.clock_period);
  }
  std::sort(periods.begin(), periods.end());
  const auto distinct = static_cast<std::size_t>(std::unique(periods.begin(), periods.end()) - periods.begin());
  if (distinct > spec.max_distinct_frequencies) v += static_cast<double>(distinct - spec.max_distinct_frequencies);
  return v;
}

std::optional<ObjectivePoint> evaluate_config(const SystemConfiguration& cfg, const SystemSpec& spec) {
  if (constraint_violation(cfg, spec) > 0.0) return std::nullopt;
  ObjectivePoint p;
  for (std::size_t c = 0; c < cfg.size(); ++c) {
    const auto& a = spec.components[c].alternatives[cfg[c]];
    // mW * ns = pJ
    p.energy += a.power * static_cast<double>(a.cycles) * a.clock_period * 1e-3;
    p.area += static_cast<double>(a.area_ff + a.area_lut);
  }
  return p;
}

std::vector<std::size_t> pareto_front(std::span<const ObjectivePoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (points[a].energy != points[b].energy) return points[a].energy < points[b].energy;
    return points[a].area < points[b].area;
  });
  std::vector<std::size_t> keep;
  double best_area = std::numeric_limits<double>::infinity();  // over strictly lower energies
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && points[order[j]].energy == points[order[i]].energy) ++j;
    // Within one energy level only the lowest area survives, with its duplicates.
    const double group_min = points[order[i]].area;
    if (group_min < best_area)
      for (std::size_t m = i; m < j && points[order[m]].area == group_min; ++m) keep.push_back(order[m]);
    best_area = std::min(best_area, group_min);
    i = j;
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

double adrs(std::span<const ObjectivePoint> reference, std::span<const ObjectivePoint> approx) {
  if (reference.empty() || approx.empty()) throw Error(ErrorKind::kInvalidArgument, "adrs: both fronts must be non-empty");
  double total = 0.0;
  for (const auto& r : reference) {
    if (!(r.energy > 0.0) || !(r.area > 0.0))
      throw Error(ErrorKind::kInvalidArgument, "adrs: reference objective values must be positive");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : approx) {
      const double d = std::max({0.0, (a.energy - r.energy) / r.energy, (a.area - r.area) / r.area});
      best = std::min(best, d);
    }
    total += best;
  }
  return total / static_cast<double>(reference.size());
}

void GaConfig::validate() const {
  if (population < 2) throw Error(ErrorKind::kInvalidArgument, "ga: population must be at least 2");
  if (tournament == 0) throw Error(ErrorKind::kInvalidArgument, "ga: tournament size must be positive");
  if (!(crossover_p >= 0.0 && crossover_p <= 1.0)) throw Error(ErrorKind::kInvalidArgument, "ga: crossover_p must be in [0, 1]");
  if (mutation_p > 1.0) throw Error(ErrorKind::kInvalidArgument, "ga: mutation_p must be at most 1");
}

DseReport ga_explore(const SystemSpec& spec, const GaConfig& config) {
  spec.validate(false);
  config.validate();
  const std::size_t genes = spec.components.size();
  const double pm = config.mutation_p < 0.0 ? 1.0 / static_cast<double>(genes) : config.mutation_p;
  Rng rng(config.seed);
  Evaluator eval(spec);

  std::vector<Individual> pop(config.population);
  for (auto& ind : pop) {
    ind.genes = random_genes(spec, rng);
    eval.evaluate(ind);
  }
  rank_population(pop);

  auto select = [&]() -> const Individual& {
    const Individual* best = &pop[rng.uniform_index(pop.size())];
    for (std::size_t t = 1; t < config.tournament; ++t) {
      const Individual& other = pop[rng.uniform_index(pop.size())];
      if (better(other, *best)) best = &other;
    }
    return *best;
  };

  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    std::vector<Individual> pool = pop;
    while (pool.size() < 2 * config.population) {
      Individual a, b;
      a.genes = select().genes;
      b.genes = select().genes;
      if (rng.uniform() < config.crossover_p)
        for (std::size_t c = 0; c < genes; ++c)
          if (rng.uniform() < 0.5) std::swap(a.genes[c], b.genes[c]);
      for (auto* child : {&a, &b}) {
        for (std::size_t c = 0; c < genes; ++c)
          if (rng.uniform() < pm) child->genes[c] = rng.uniform_index(spec.components[c].alternatives.size());
        eval.evaluate(*child);
        if (pool.size() < 2 * config.population) pool.push_back(std::move(*child));
      }
    }
    // Duplicate chromosomes would crowd the front, so survival works on
    // distinct ones and only repeats survivors if too few remain.
    std::vector<Individual> unique;
    std::set<SystemConfiguration> seen;
    for (auto& ind : pool)
      if (seen.insert(ind.genes).second) unique.push_back(std::move(ind));
    rank_population(unique);
    std::vector<std::size_t> idx(unique.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      if (better(unique[a], unique[b])) return true;
      if (better(unique[b], unique[a])) return false;
      return a < b;
    });
    std::vector<Individual> next;
    for (std::size_t m = 0; next.size() < config.population; ++m) next.push_back(unique[idx[m % idx.size()]]);
    pop = std::move(next);
    rank_population(pop);
  }

  DseReport report;
  report.generations = config.generations;
  report.seed = config.seed;
  report.evaluations = eval.evaluations();
  std::vector<FrontEntry> front;
  std::set<SystemConfiguration> seen;
  for (const auto& ind : pop)
    if (ind.violation == 0.0 && ind.rank == 0 && seen.insert(ind.genes).second) front.push_back({ind.genes, ind.point});
  report.front = sorted_front(std::move(front));
  if (report.front.empty()) report.diagnostic = infeasible_diagnostic(spec);
  return report;
}

std::vector<FrontEntry> brute_force_explore(const SystemSpec& spec, std::uint64_t limit) {
  spec.validate(false);
  const std::uint64_t total = spec.configuration_count();
  if (total > limit)
    throw Error(ErrorKind::kInvalidArgument, "brute force: " + std::to_string(total) +
                                                 " configurations exceed the limit of " + std::to_string(limit));
  std::vector<FrontEntry> feasible;
  SystemConfiguration cfg(spec.components.size(), 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    if (auto p = evaluate_config(cfg, spec)) feasible.push_back({cfg, *p});
    for (std::size_t c = 0; c < cfg.size(); ++c) {
      if (++cfg[c] < spec.components[c].alternatives.size()) break;
      cfg[c] = 0;
    }
    // Prune dominated candidates periodically to bound memory.
    if (feasible.size() > 4096) {
      const auto pts = points_of(feasible);
      std::vector<FrontEntry> kept;
      for (auto i : pareto_front(pts)) kept.push_back(feasible[i]);
      feasible = std::move(kept);
    }
  }
  const auto pts = points_of(feasible);
  std::vector<FrontEntry> front;
  for (auto i : pareto_front(pts)) front.push_back(feasible[i]);
  return sorted_front(std::move(front));
}

std::vector<ObjectivePoint> points_of(std::span<const FrontEntry> front) {
  std::vector<ObjectivePoint> pts;
  pts.reserve(front.size());
  for (const auto& e : front) pts.push_back(e.point);
  return pts;
}

SystemSpec parse_system_spec(const std::string& json_text) {
  SystemSpec spec;
  try {
    const json doc = json::parse(json_text);
    spec.max_distinct_frequencies = doc.at("max_distinct_frequencies").get<std::size_t>();
    for (const auto& jc : doc.at("components")) {
      Component c;
      c.name = jc.at("name").get<std::string>();
      c.deadline = jc.at("deadline").get<double>();
      for (const auto& ja : jc.at("alternatives")) {
        DesignAlternative a;
        a.cycles = ja.at("cycles").get<std::uint64_t>();
        a.area_ff = ja.at("area_ff").get<std::uint64_t>();
        a.area_lut = ja.at("area_lut").get<std::uint64_t>();
        a.critical_path = ja.at("critical_path").get<double>();
        a.power = ja.at("power").get<double>();
        a.clock_period = ja.at("clock_period").get<double>();
        c.alternatives.push_back(a);
      }
      spec.components.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("system spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SystemSpec load_system_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open system spec '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system_spec(ss.str());
}

std::string system_spec_to_json(const SystemSpec& spec) {
  json doc;
  doc["max_distinct_frequencies"] = spec.max_distinct_frequencies;
  doc["components"] = json::array();
  for (const auto& c : spec.components) {
    json jc{{"name", c.name}, {"deadline", c.deadline}, {"alternatives", json::array()}};
    for (const auto& a : c.alternatives) jc["alternatives"].push_back(alternative_json(a));
    doc["components"].push_back(std::move(jc));
  }
  return doc.dump(2) + "\n";
}

std::string report_to_json(const DseReport& report, const SystemSpec& spec) {
  json doc;
  doc["seed"] = report.seed;
  doc["generations"] = report.generations;
  doc["evaluations"] = report.evaluations;
  doc["adrs"] = report.adrs ? json(*report.adrs) : json(nullptr);
  doc["adrs_percent"] = report.adrs ? json(*report.adrs * 100.0) : json(nullptr);
  if (!report.diagnostic.empty()) doc["diagnostic"] = report.diagnostic;
  doc["front"] = json::array();
  for (const auto& e : report.front) {
    json choice = json::object();
    for (std::size_t c = 0; c < e.config.size(); ++c) choice[spec.components.at(c).name] = e.config[c];
    doc["front"].push_back({{"energy_nj", e.point.energy}, {"area", e.point.area}, {"choice", choice}});
  }
  return doc.dump(2) + "\n";
}

std::string front_to_csv(const DseReport& report, const SystemSpec& spec) {
  std::ostringstream os;
  os << "energy_nj,area";
  for (const auto& c : spec.components) os << ',' << c.name;
  os << '\n';
  for (const auto& e : report.front) {
    os << format_real(e.point.energy) << ',' << format_real(e.point.area);
    for (auto i : e.config) os << ',' << i;
    os << '\n';
  }
  return os.str();
}

}  // namespace hlsforge::dse
