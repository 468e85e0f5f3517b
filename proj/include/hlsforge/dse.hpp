#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hlsforge::dse {

// One implemented variant of a component.
struct DesignAlternative {
  std::uint64_t cycles = 0;
  std::uint64_t area_ff = 0;
  std::uint64_t area_lut = 0;
  double critical_path = 0.0;  // ns
  double power = 0.0;          // mW
  double clock_period = 0.0;   // ns

  bool operator==(const DesignAlternative&) const = default;
};

struct Component {
  std::string name;
  double deadline = 0.0;  // ns
  std::vector<DesignAlternative> alternatives;
};

struct SystemSpec {
  std::vector<Component> components;
  std::size_t max_distinct_frequencies = 1;

  // Throws Error(kSchema). With `require_timing`, also rejects alternatives
  // whose critical path exceeds their clock period.
  void validate(bool require_timing = true) const;
  // Product of alternative counts, saturating at UINT64_MAX.
  std::uint64_t configuration_count() const;
};

// Alternative index per component.
using SystemConfiguration = std::vector<std::size_t>;

struct ObjectivePoint {
  double energy = 0.0;  // nJ
  double area = 0.0;    // FF + LUT

  bool operator==(const ObjectivePoint&) const = default;
};

// Sum of normalized constraint excesses; 0 exactly when feasible.
double constraint_violation(const SystemConfiguration& cfg, const SystemSpec& spec);

// Energy = sum of power * cycles * clock_period, area = sum of FF + LUT.
// Empty when a deadline, the frequency budget or a component's timing is
// violated.
std::optional<ObjectivePoint> evaluate_config(const SystemConfiguration& cfg, const SystemSpec& spec);

// Indices (ascending) of the points not dominated under minimization of
// both objectives. Duplicates of a non-dominated point are all kept.
std::vector<std::size_t> pareto_front(std::span<const ObjectivePoint> points);

// Mean over reference points of the smallest worst-objective relative excess
// of any approximation point. Reference coordinates must be positive.
double adrs(std::span<const ObjectivePoint> reference, std::span<const ObjectivePoint> approx);

struct FrontEntry {
  SystemConfiguration config;
  ObjectivePoint point;

  bool operator==(const FrontEntry&) const = default;
};

struct GaConfig {
  std::size_t population = 100;
  std::size_t generations = 200;
  double crossover_p = 0.9;
  double mutation_p = -1.0;  // per gene; negative means 1 / components
  std::size_t tournament = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DseReport {
  std::vector<FrontEntry> front;  // sorted by energy, then area
  std::optional<double> adrs;     // against a reference front, when computed
  std::size_t generations = 0;
  std::uint64_t seed = 0;
  std::size_t evaluations = 0;    // distinct configurations evaluated
  std::string diagnostic;         // set when the front is empty
};

// NSGA-II with constraint-domination: feasible configurations rank above
// infeasible ones, which are ordered by violation.
DseReport ga_explore(const SystemSpec& spec, const GaConfig& config);

inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

// Exhaustive feasible front. Throws Error(kInvalidArgument) above the limit.
std::vector<FrontEntry> brute_force_explore(const SystemSpec& spec, std::uint64_t limit = kBruteForceLimit);

std::vector<ObjectivePoint> points_of(std::span<const FrontEntry> front);

// SystemSpec document: {"max_distinct_frequencies": k, "components": [{"name",
// "deadline", "alternatives": [{cycles, area_ff, area_lut, critical_path,
// power, clock_period}]}]}.
SystemSpec parse_system_spec(const std::string& json_text);
SystemSpec load_system_spec(const std::filesystem::path& path);
std::string system_spec_to_json(const SystemSpec& spec);

std::string report_to_json(const DseReport& report, const SystemSpec& spec);
// One row per front entry: energy, area, then the chosen alternative per component.
std::string front_to_csv(const DseReport& report, const SystemSpec& spec);

}  // namespace hlsforge::dse
