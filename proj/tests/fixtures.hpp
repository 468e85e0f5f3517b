#pragma once

#include <cstddef>
#include <cstdint>

#include "hlsforge/dataset.hpp"
#include "hlsforge/dse.hpp"

namespace hlsforge::testing {

// The twenty synthesis-report variables of one design point, with default
// ranges. Integer counts except the clock estimate and dynamic power.
Schema table2_schema();

// The worked example row: project io1-l2n1n1-l4n1n1.
HlsSample table2_sample();

// Correlated bimodal ground truth. Each sample picks one of two design
// regimes (small/large), then one shared log-normal scale multiplies every
// variable, plus small independent jitter.
Corpus bimodal_corpus(std::size_t n, std::uint64_t seed);

// Random system with Pareto trade-offs: more parallel alternatives take
// fewer cycles but more area and power. Deadlines leave some alternatives
// infeasible.
dse::SystemSpec random_spec(std::size_t components, std::size_t alternatives, std::uint64_t seed,
                            std::size_t max_frequencies = 2);

// Three components with twenty alternatives each.
dse::SystemSpec case_study_spec();

}  // namespace hlsforge::testing
