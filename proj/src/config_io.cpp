#include "hlsforge/config_io.hpp"

#include <set>
#include <string>

#include "hlsforge/error.hpp"

namespace hlsforge {
namespace {

using nlohmann::json;

// Reads fields that are present and rejects keys outside `known`.
class FieldReader {
 public:
  FieldReader(const json& j, const char* what, std::set<std::string> known) : j_(j), what_(what) {
    if (!j.is_object()) throw Error(ErrorKind::kSchema, std::string(what) + " config must be a JSON object");
    for (const auto& [key, value] : j.items())
      if (!known.count(key)) throw Error(ErrorKind::kSchema, std::string(what) + " config: unknown key '" + key + "'");
  }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::kSchema, std::string(what_) + " config: bad value for '" + key + "'");
    }
  }

 private:
  const json& j_;
  const char* what_;
};

}  // namespace

void to_json(json& j, const MlpVaeConfig& c) {
  j = json{{"rows", c.rows},
           {"cols", c.cols},
           {"hidden_sizes", c.hidden_sizes},
           {"latent_dim", c.latent_dim},
           {"lr", c.lr},
           {"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"msb_weight_gamma", c.msb_weight_gamma},
           {"seed", c.seed},
           {"bernoulli_sampling", c.bernoulli_sampling},
           {"trace_samples", c.trace_samples}};
}

void from_json(const json& j, MlpVaeConfig& c) {
  FieldReader r(j, "mlpvae",
                {"rows", "cols", "hidden_sizes", "latent_dim", "lr", "batch_size", "epochs", "msb_weight_gamma", "seed",
                 "bernoulli_sampling", "trace_samples"});
  r.read("rows", c.rows);
  r.read("cols", c.cols);
  r.read("hidden_sizes", c.hidden_sizes);
  r.read("latent_dim", c.latent_dim);
  r.read("lr", c.lr);
  r.read("batch_size", c.batch_size);
  r.read("epochs", c.epochs);
  r.read("msb_weight_gamma", c.msb_weight_gamma);
  r.read("seed", c.seed);
  r.read("bernoulli_sampling", c.bernoulli_sampling);
  r.read("trace_samples", c.trace_samples);
}

void to_json(json& j, const DcganConfig& c) {
  j = json{{"rows", c.rows},
           {"cols", c.cols},
           {"canvas_rows", c.canvas_rows},
           {"canvas_cols", c.canvas_cols},
           {"latent_dim", c.latent_dim},
           {"feature_maps", c.feature_maps},
           {"lr_generator", c.lr_generator},
           {"lr_discriminator", c.lr_discriminator},
           {"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"seed", c.seed},
           {"trace_samples", c.trace_samples}};
}

void from_json(const json& j, DcganConfig& c) {
  FieldReader r(j, "dcgan",
                {"rows", "cols", "canvas_rows", "canvas_cols", "latent_dim", "feature_maps", "lr_generator",
                 "lr_discriminator", "batch_size", "epochs", "seed", "trace_samples"});
  r.read("rows", c.rows);
  r.read("cols", c.cols);
  r.read("canvas_rows", c.canvas_rows);
  r.read("canvas_cols", c.canvas_cols);
  r.read("latent_dim", c.latent_dim);
  r.read("feature_maps", c.feature_maps);
  r.read("lr_generator", c.lr_generator);
  r.read("lr_discriminator", c.lr_discriminator);
  r.read("batch_size", c.batch_size);
  r.read("epochs", c.epochs);
  r.read("seed", c.seed);
  r.read("trace_samples", c.trace_samples);
}

void to_json(json& j, const AbcConfig& c) {
  j = json{{"prior_width", c.prior_width},
           {"epsilon", c.epsilon},
           {"sim_batch", c.sim_batch},
           {"max_trials", c.max_trials},
           {"posterior_size", c.posterior_size}};
}

void from_json(const json& j, AbcConfig& c) {
  FieldReader r(j, "abc", {"prior_width", "epsilon", "sim_batch", "max_trials", "posterior_size"});
  r.read("prior_width", c.prior_width);
  r.read("epsilon", c.epsilon);
  r.read("sim_batch", c.sim_batch);
  r.read("max_trials", c.max_trials);
  r.read("posterior_size", c.posterior_size);
}

}  // namespace hlsforge

namespace hlsforge::dse {

void to_json(nlohmann::json& j, const GaConfig& c) {
  j = nlohmann::json{{"population", c.population},   {"generations", c.generations}, {"crossover_p", c.crossover_p},
                     {"mutation_p", c.mutation_p},   {"tournament", c.tournament},   {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GaConfig& c) {
  FieldReader r(j, "ga", {"population", "generations", "crossover_p", "mutation_p", "tournament", "seed"});
  r.read("population", c.population);
  r.read("generations", c.generations);
  r.read("crossover_p", c.crossover_p);
  r.read("mutation_p", c.mutation_p);
  r.read("tournament", c.tournament);
  r.read("seed", c.seed);
}

}  // namespace hlsforge::dse
