#include "fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hlsforge/rng.hpp"

namespace hlsforge::testing {
namespace {

struct Regimes {
  const char* name;
  const char* unit;
  VariableKind kind;
  double small, large;
  bool jitter;
};

constexpr std::array<Regimes, 20> kVariables{{
    {"Clk-estimated", "ns", VariableKind::kReal, 8.419, 6.1, true},
    {"BRAM", "count", VariableKind::kInteger, 32, 128, true},
    {"DSP", "count", VariableKind::kInteger, 5, 40, true},
    {"FF", "count", VariableKind::kInteger, 727, 4100, true},
    {"LUT", "count", VariableKind::kInteger, 1231, 6900, true},
    {"c-num-arith", "count", VariableKind::kInteger, 22, 88, true},
    {"c-num-logic", "count", VariableKind::kInteger, 10, 40, true},
    {"rtl-num-arith", "count", VariableKind::kInteger, 19, 76, true},
    {"rtl-num-logic", "count", VariableKind::kInteger, 10, 40, true},
    {"input-port", "count", VariableKind::kInteger, 128, 256, false},
    {"output-port", "count", VariableKind::kInteger, 32, 64, false},
    {"DP", "mW", VariableKind::kReal, 17.103, 61.5, true},
    {"Total LUTs", "count", VariableKind::kInteger, 654, 3900, true},
    {"Logic LUTs", "count", VariableKind::kInteger, 654, 3600, true},
    {"LUTRAMs", "count", VariableKind::kInteger, 0, 300, true},
    {"SRLs", "count", VariableKind::kInteger, 0, 120, true},
    {"FFs", "count", VariableKind::kInteger, 498, 3300, true},
    {"RAMB36", "count", VariableKind::kInteger, 16, 64, true},
    {"RAMB18", "count", VariableKind::kInteger, 0, 8, true},
    {"DSP48", "count", VariableKind::kInteger, 5, 40, true},
}};

}  // namespace

Schema table2_schema() {
  Schema s;
  s.part_id = "xc7v585tffg1157-3";
  for (const auto& v : kVariables) s.variables.push_back({v.name, v.unit, v.kind});
  return s;
}

HlsSample table2_sample() {
  HlsSample s;
  s.project_id = "io1-l2n1n1-l4n1n1";
  s.values = {8.419, 32, 5, 727, 1231, 22, 10, 19, 10, 128, 32, 17.103, 654, 654, 0, 0, 498, 16, 0, 5};
  return s;
}

Corpus bimodal_corpus(std::size_t n, std::uint64_t seed) {
  Corpus c;
  c.schema = table2_schema();
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    HlsSample s;
    const bool large = rng.uniform() < 0.4;
    s.project_id = (large ? "large-" : "small-") + std::to_string(i);
    const double scale = std::exp(0.15 * rng.normal());
    for (const auto& v : kVariables) {
      double x = large ? v.large : v.small;
      if (v.jitter) x *= scale * (1.0 + 0.05 * rng.normal());
      x = std::max(0.0, x);
      if (v.kind == VariableKind::kInteger) x = std::nearbyint(x);
      else x = std::nearbyint(x * 1000.0) / 1000.0;
      s.values.push_back(x);
    }
    c.samples.push_back(std::move(s));
  }
  c.validate();
  return c;
}

dse::SystemSpec random_spec(std::size_t components, std::size_t alternatives, std::uint64_t seed,
                            std::size_t max_frequencies) {
  static constexpr double kPeriods[] = {5.0, 10.0, 20.0};
  Rng rng(seed);
  dse::SystemSpec spec;
  spec.max_distinct_frequencies = max_frequencies;
  for (std::size_t c = 0; c < components; ++c) {
    dse::Component comp;
    comp.name = "comp" + std::to_string(c);
    const double base_cycles = rng.uniform(2000.0, 20000.0);
    const double base_ff = rng.uniform(300.0, 3000.0);
    const double base_lut = rng.uniform(500.0, 5000.0);
    const double base_power = rng.uniform(5.0, 40.0);
    comp.deadline = base_cycles * 10.0 * 0.6;
    for (std::size_t a = 0; a < alternatives; ++a) {
      const double u = std::pow(2.0, rng.uniform(0.0, 4.0));
      const double period = kPeriods[rng.uniform_index(3)];
      auto jitter = [&] { return std::max(0.5, 1.0 + 0.1 * rng.normal()); };
      dse::DesignAlternative alt;
      alt.cycles = static_cast<std::uint64_t>(std::llround(base_cycles / u * jitter()));
      alt.area_ff = static_cast<std::uint64_t>(std::llround(base_ff * std::pow(u, 0.9) * jitter()));
      alt.area_lut = static_cast<std::uint64_t>(std::llround(base_lut * std::pow(u, 0.9) * jitter()));
      alt.power = std::nearbyint(base_power * std::pow(u, 0.8) * std::pow(10.0 / period, 0.9) * jitter() * 1000.0) / 1000.0;
      alt.clock_period = period;
      alt.critical_path = std::nearbyint(period * rng.uniform(0.55, 0.98) * 1000.0) / 1000.0;
      comp.alternatives.push_back(alt);
    }
    spec.components.push_back(std::move(comp));
  }
  spec.validate();
  return spec;
}

dse::SystemSpec case_study_spec() { return random_spec(3, 20, 2024, 2); }

}  // namespace hlsforge::testing
