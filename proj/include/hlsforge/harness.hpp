#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hlsforge/baselines.hpp"
#include "hlsforge/dataset.hpp"
#include "hlsforge/fidelity.hpp"
#include "hlsforge/gan.hpp"
#include "hlsforge/vae.hpp"

namespace hlsforge {

struct RunConfig {
  std::filesystem::path corpus;  // CSV
  std::filesystem::path schema;  // schema JSON for the CSV
  std::string generator;         // mlpvae | dcgan | gaussian | abc
  MlpVaeConfig mlpvae;
  DcganConfig dcgan;
  AbcConfig abc;
  std::size_t runs = 5;
  std::uint64_t base_seed = 0;
  std::size_t samples = 0;  // synthetic samples per run; 0 means the corpus size
  std::filesystem::path out;

  void validate() const;
};

// Run config document: {"corpus", "schema", "generator", "runs", "base_seed",
// "samples", "out", "model": {...}}. Relative paths resolve against
// `base_dir`.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Trains (for models) and samples once per seed base_seed .. base_seed +
// runs - 1, writing <out>/run<k>/checkpoint and trace.csv and <out>/report.
// Outputs created by a failed call are removed.
FidelityReport run_experiment(const RunConfig& cfg);
// Same on an already loaded corpus; cfg.corpus and cfg.schema are ignored.
FidelityReport run_experiment(const Corpus& corpus, const RunConfig& cfg);

// Per-variable MMD between decoded sample values, each variable scaled by the
// real data's range.
double value_space_mmd(const Corpus& real, std::span<const HlsSample> synth);

struct ComparisonTable {
  std::string corpus_id;
  std::vector<std::string> generators;
  std::vector<FidelityMetrics> mean;
  std::vector<FidelityMetrics> stddev;
  // best[column][row] for columns mmd, ssd, prd, coss; ties are all flagged.
  std::vector<std::vector<bool>> best;
};

// Requires at least two reports over the same corpus.
ComparisonTable compare_table(std::span<const FidelityReport> reports);
std::string table_to_text(const ComparisonTable& table);
std::string table_to_json(const ComparisonTable& table);

}  // namespace hlsforge
