#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hlsforge/baselines.hpp"
#include "hlsforge/dataset.hpp"
#include "hlsforge/dse.hpp"
#include "hlsforge/gan.hpp"
#include "hlsforge/vae.hpp"

namespace hlsforge::dse {

// Which generator synthesizes design alternatives, with its settings.
struct GeneratorDescriptor {
  std::string kind;  // identity | gaussian | abc | mlpvae | dcgan
  MlpVaeConfig mlpvae;
  DcganConfig dcgan;
  AbcConfig abc;
};

// Design alternatives of all components as one corpus: six metric variables
// plus a "component" directive whose domain is the component names.
Corpus alternatives_corpus(const SystemSpec& spec);
// Same metrics, one component, no directives.
Corpus component_corpus(const SystemSpec& spec, std::size_t component);

DesignAlternative alternative_from_values(std::span<const double> values);

// Synthetic alternatives per component, as many as the real spec holds.
// Models are trained on the pooled corpus and sampled until every
// component's quota is met or the sampling budget runs out.
std::vector<std::vector<DesignAlternative>> synthesize_alternatives(const SystemSpec& real,
                                                                    const GeneratorDescriptor& generator,
                                                                    std::uint64_t seed);

// Index of the real alternative closest to `synth` in metric space, each
// metric scaled by its spread over the component's real alternatives.
std::size_t nearest_alternative(const Component& real, const DesignAlternative& synth);

struct SynthRun {
  std::uint64_t seed = 0;
  double adrs = 0.0;  // +inf when no synthetic choice is feasible on the real system
  std::size_t front_size = 0;
  std::string diagnostic;
};

struct SynthCompareRow {
  std::string generator;
  std::vector<SynthRun> runs;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over seeds
};

struct SynthCompareResult {
  std::vector<FrontEntry> reference;  // real front
  std::vector<SynthCompareRow> rows;
};

// For each generator and seed: synthesize alternatives, explore the
// synthetic system with the GA, realize each chosen synthetic alternative
// as its nearest real one, evaluate on the real system and score the
// resulting front against the real front with ADRS.
SynthCompareResult synth_system_compare(const SystemSpec& real, std::span<const GeneratorDescriptor> generators,
                                        std::span<const std::uint64_t> seeds, const GaConfig& ga = {});

std::string compare_to_json(const SynthCompareResult& result);
std::string compare_to_text(const SynthCompareResult& result);

}  // namespace hlsforge::dse
