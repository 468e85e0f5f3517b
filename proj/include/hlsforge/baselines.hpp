#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hlsforge/dataset.hpp"
#include "hlsforge/rng.hpp"

namespace hlsforge {

// Draws each variable independently from a normal fitted to the corpus
// (per benchmark when the schema declares directives), clamps to the schema
// range and rounds integer variables. Directive options are uniform over
// their domains.
std::vector<HlsSample> gaussian_generate(const Corpus& corpus, std::size_t n, Rng& rng);

struct AbcConfig {
  double prior_width = 0.5;  // prior half-width relative to the empirical moment
  double epsilon = 0.1;      // acceptance threshold on the normalized distance
  std::size_t sim_batch = 256;
  std::size_t max_trials = 100000;  // per variable
  std::size_t posterior_size = 16;  // accepted draws kept per variable

  void validate() const;
};

// Accepted (mu, sigma) draws for one variable of one group.
struct AbcVariablePosterior {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t trials = 0;
  double best_distance = std::numeric_limits<double>::infinity();
};

// Rejection sampling per variable. The prior is uniform within
// +-prior_width times the empirical mean and std; a draw is accepted when
// the simulated batch's mean and std, z-normalized by the empirical std,
// lie within epsilon (Euclidean) of the empirical ones.
AbcVariablePosterior abc_fit_variable(std::span<const double> observed, const AbcConfig& config, Rng& rng);

std::vector<HlsSample> abc_generate(const Corpus& corpus, std::size_t n, Rng& rng, const AbcConfig& config = {});

}  // namespace hlsforge
