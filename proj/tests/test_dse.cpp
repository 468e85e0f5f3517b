#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "hlsforge/dse.hpp"
#include "hlsforge/error.hpp"
#include "hlsforge/synth_compare.hpp"

using namespace hlsforge;
using namespace hlsforge::dse;

namespace {

DesignAlternative alt(std::uint64_t cycles, double period, double power, std::uint64_t ff = 10,
                      std::uint64_t lut = 20) {
  return {cycles, ff, lut, 0.8 * period, power, period};
}

// O(n^2) reference: a point survives when nothing dominates it.
std::vector<std::size_t> oracle_front(const std::vector<ObjectivePoint>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
      dominated = pts[j].energy <= pts[i].energy && pts[j].area <= pts[i].area &&
                  (pts[j].energy < pts[i].energy || pts[j].area < pts[i].area);
    if (!dominated) out.push_back(i);
  }
  return out;
}

GeneratorDescriptor generator(const std::string& kind) {
  GeneratorDescriptor g;
  g.kind = kind;
  return g;
}

GaConfig quick_ga(std::uint64_t seed) {
  GaConfig g;
  g.population = 60;
  g.generations = 80;
  g.seed = seed;
  return g;
}

}  // namespace

TEST_CASE("energy of a single component") {
  SystemSpec spec;
  spec.components = {{"io", 20000.0, {alt(1000, 10.0, 17.103)}}};
  const auto p = evaluate_config({0}, spec);
  REQUIRE(p);
  CHECK(p->energy == doctest::Approx(171.03));
  CHECK(p->area == 30.0);
}

TEST_CASE("feasibility constraints") {
  SystemSpec spec;
  spec.components = {{"a", 1e6, {alt(100, 10.0, 1.0)}}, {"b", 1e6, {alt(100, 5.0, 1.0), alt(200, 10.0, 1.0)}}};
  spec.max_distinct_frequencies = 1;
  CHECK_FALSE(evaluate_config({0, 0}, spec));
  CHECK(constraint_violation({0, 0}, spec) > 0.0);
  CHECK(evaluate_config({0, 1}, spec));
  CHECK(constraint_violation({0, 1}, spec) == 0.0);
  spec.max_distinct_frequencies = 2;
  CHECK(evaluate_config({0, 0}, spec));

  // Latency exactly at the deadline is allowed.
  SystemSpec edge;
  edge.components = {{"c", 1000.0, {alt(100, 10.0, 1.0)}}};
  CHECK(evaluate_config({0}, edge));
  edge.components[0].deadline = 999.0;
  CHECK_FALSE(evaluate_config({0}, edge));

  // A critical path longer than the clock period fails timing.
  SystemSpec slow;
  slow.components = {{"d", 1e6, {{100, 1, 1, 12.0, 1.0, 10.0}}}};
  CHECK_FALSE(evaluate_config({0}, slow));
  CHECK_THROWS_AS(slow.validate(), Error);
  CHECK_NOTHROW(slow.validate(false));
}

TEST_CASE("spec validation") {
  SystemSpec spec;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.components = {{"a", 10.0, {}}};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.components = {{"a", 10.0, {alt(1, 1, 1)}}, {"a", 10.0, {alt(1, 1, 1)}}};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.components[1].name = "b";
  CHECK_NOTHROW(spec.validate());
  spec.components[1].deadline = 0.0;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("pareto examples") {
  const std::vector<ObjectivePoint> pts{{1, 2}, {2, 1}, {2, 2}};
  CHECK(pareto_front(pts) == std::vector<std::size_t>{0, 1});
  const std::vector<ObjectivePoint> same(4, ObjectivePoint{3, 3});
  CHECK(pareto_front(same) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(pareto_front(std::vector<ObjectivePoint>{}).empty());
  // Equal energy, different area: only the smaller area survives.
  const std::vector<ObjectivePoint> tie{{1, 5}, {1, 3}, {4, 1}};
  CHECK(pareto_front(tie) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("pareto front matches the quadratic oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ObjectivePoint> pts(1000);
    for (auto& p : pts) {
      // Coarse grid so ties and duplicates occur.
      p.energy = std::floor(rng.uniform(0, 50));
      p.area = std::floor(rng.uniform(0, 50));
    }
    const auto front = pareto_front(pts);
    CHECK(front == oracle_front(pts));

    // Scaling both objectives leaves membership unchanged.
    auto scaled = pts;
    for (auto& p : scaled) {
      p.energy *= 3.7;
      p.area *= 3.7;
    }
    CHECK(pareto_front(scaled) == front);
  }
}

TEST_CASE("adrs examples") {
  const std::vector<ObjectivePoint> r{{1, 1}}, a{{2, 2}};
  CHECK(adrs(r, a) == doctest::Approx(1.0));
  CHECK(adrs(r, r) == 0.0);
  const std::vector<ObjectivePoint> wider{{1, 1}, {5, 0.5}};
  CHECK(adrs(r, wider) == 0.0);
  const std::vector<ObjectivePoint> r2{{2, 4}, {4, 2}}, a2{{3, 4}};
  // (3-2)/2 = 0.5 for the first; max(0, -1/4, (4-2)/2 = 1) = 1 for the second.
  CHECK(adrs(r2, a2) == doctest::Approx(0.75));

  std::vector<ObjectivePoint> s2 = r2, t2 = a2;
  for (auto& p : s2) p = {p.energy * 10, p.area * 10};
  for (auto& p : t2) p = {p.energy * 10, p.area * 10};
  CHECK(adrs(s2, t2) == doctest::Approx(0.75));

  const std::vector<ObjectivePoint> zero{{0, 1}}, none;
  CHECK_THROWS_AS(adrs(zero, a), Error);
  CHECK_THROWS_AS(adrs(r, none), Error);
}

TEST_CASE("adrs is zero exactly under weak dominance") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ObjectivePoint> r(5), a(4);
    for (auto& p : r) p = {std::ceil(rng.uniform(0, 6)), std::ceil(rng.uniform(0, 6))};
    for (auto& p : a) p = {std::ceil(rng.uniform(0, 6)), std::ceil(rng.uniform(0, 6))};
    bool covered = true;
    for (const auto& x : r) {
      bool any = false;
      for (const auto& y : a) any = any || (y.energy <= x.energy && y.area <= x.area);
      covered = covered && any;
    }
    const double d = adrs(r, a);
    CHECK(d >= 0.0);
    CHECK((d == 0.0) == covered);
  }
}

TEST_CASE("ga matches brute force on a single component") {
  SystemSpec spec;
  spec.components = {{"x", 1e6, {alt(100, 10, 5, 100, 100), alt(50, 10, 9, 300, 300), alt(80, 10, 9, 400, 400)}}};
  const auto brute = brute_force_explore(spec);
  const auto ga = ga_explore(spec, quick_ga(1));
  CHECK(ga.front == brute);
  REQUIRE(brute.size() == 2);
}

TEST_CASE("ga approaches the exhaustive front on 625 configurations") {
  const SystemSpec spec = testing::random_spec(4, 5, 7);
  REQUIRE(spec.configuration_count() == 625);
  const auto brute = brute_force_explore(spec);
  REQUIRE_FALSE(brute.empty());
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto report = ga_explore(spec, GaConfig{.seed = seed});
    for (const auto& e : report.front) {
      const auto p = evaluate_config(e.config, spec);
      REQUIRE(p);
      CHECK(*p == e.point);
    }
    if (!report.front.empty() && adrs(points_of(brute), points_of(report.front)) <= 0.05) ++good;
  }
  CHECK(good >= 4);
}

TEST_CASE("ga is deterministic per seed") {
  const SystemSpec spec = testing::random_spec(3, 6, 3);
  const auto a = ga_explore(spec, quick_ga(4));
  const auto b = ga_explore(spec, quick_ga(4));
  CHECK(a.front == b.front);
  CHECK(report_to_json(a, spec) == report_to_json(b, spec));
}

TEST_CASE("all alternatives miss their deadlines") {
  SystemSpec spec;
  spec.components = {{"a", 10.0, {alt(100, 10, 1), alt(200, 10, 1)}}, {"b", 10.0, {alt(100, 10, 1)}}};
  const auto report = ga_explore(spec, quick_ga(1));
  CHECK(report.front.empty());
  CHECK_FALSE(report.diagnostic.empty());
  CHECK(brute_force_explore(spec).empty());
}

TEST_CASE("brute force limits") {
  const SystemSpec spec = testing::random_spec(3, 10, 1);
  CHECK_THROWS_AS(brute_force_explore(spec, 999), Error);
  SystemSpec single;
  single.components = {{"s", 1e6, {alt(10, 10, 1)}}};
  const auto f = brute_force_explore(single);
  REQUIRE(f.size() == 1);
  CHECK(f[0].config == SystemConfiguration{0});
}

TEST_CASE("ga config validation") {
  GaConfig g;
  g.population = 1;
  CHECK_THROWS_AS(g.validate(), Error);
  g = {};
  g.crossover_p = 1.5;
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("system spec json roundtrip") {
  const SystemSpec spec = testing::random_spec(3, 4, 9);
  const SystemSpec back = parse_system_spec(system_spec_to_json(spec));
  REQUIRE(back.components.size() == 3);
  CHECK(back.max_distinct_frequencies == spec.max_distinct_frequencies);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(back.components[c].name == spec.components[c].name);
    CHECK(back.components[c].deadline == spec.components[c].deadline);
    CHECK(back.components[c].alternatives == spec.components[c].alternatives);
  }
  CHECK_THROWS_AS(parse_system_spec("{\"components\": 4}"), Error);
  CHECK_THROWS_AS(parse_system_spec("not json"), Error);

  const auto report = ga_explore(spec, quick_ga(2));
  const std::string csv = front_to_csv(report, spec);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(report.front.size() + 1));
}

TEST_CASE("alternatives corpus") {
  const SystemSpec spec = testing::random_spec(3, 4, 9);
  const Corpus c = alternatives_corpus(spec);
  CHECK(c.size() == 12);
  CHECK(c.schema.variables.size() == 6);
  CHECK(c.schema.directive_count() == 1);
  CHECK(benchmark_of(c.samples[5]) == spec.components[1].name);
  const auto a = alternative_from_values(c.samples[5].values);
  CHECK(a.cycles == spec.components[1].alternatives[1].cycles);
  CHECK(a.area_lut == spec.components[1].alternatives[1].area_lut);
  CHECK(nearest_alternative(spec.components[1], spec.components[1].alternatives[2]) == 2);
}

TEST_CASE("identity generator reaches the GA noise floor") {
  const SystemSpec spec = testing::random_spec(3, 6, 5);
  const std::vector<GeneratorDescriptor> gens{generator("identity")};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto result = synth_system_compare(spec, gens, seeds, quick_ga(0));
  REQUIRE(result.rows.size() == 1);
  for (const auto& run : result.rows[0].runs) CHECK(run.adrs <= 0.05);
  CHECK(compare_to_text(result).find("identity") != std::string::npos);
  CHECK(compare_to_json(result).find("\"identity\"") != std::string::npos);

  const std::vector<GeneratorDescriptor> bad{generator("nope")};
  CHECK_THROWS_AS(synth_system_compare(spec, bad, seeds, quick_ga(0)), Error);
}

TEST_CASE("gaussian synthetic alternatives keep component quotas") {
  const SystemSpec spec = testing::random_spec(3, 6, 5);
  const auto synth = synthesize_alternatives(spec, generator("gaussian"), 3);
  REQUIRE(synth.size() == 3);
  for (const auto& s : synth) CHECK(s.size() == 6);
  CHECK(synthesize_alternatives(spec, generator("gaussian"), 3) == synth);
}
