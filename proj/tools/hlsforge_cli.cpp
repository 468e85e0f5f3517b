// hlsforge: command-line front end for the synthetic HLS data pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hlsforge/baselines.hpp"
#include "hlsforge/checkpoint.hpp"
#include "hlsforge/codec.hpp"
#include "hlsforge/config_io.hpp"
#include "hlsforge/dataset.hpp"
#include "hlsforge/dse.hpp"
#include "hlsforge/error.hpp"
#include "hlsforge/fidelity.hpp"
#include "hlsforge/gan.hpp"
#include "hlsforge/harness.hpp"
#include "hlsforge/synth_compare.hpp"
#include "hlsforge/vae.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hlsforge;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, "'" + path.string() + "': " + e.what());
  }
}

template <typename T>
T config_from(const fs::path& path) {
  if (path.empty()) return T{};
  try {
    return read_json(path).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, "'" + path.string() + "': " + e.what());
  }
}

fs::path schema_sidecar(const fs::path& bits) { return fs::path(bits.string() + ".schema.json"); }

// --seed, then HLSFORGE_SEED, then 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("HLSFORGE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::kInvalidArgument, std::string("HLSFORGE_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

std::vector<BitMatrix> load_samples(const fs::path& bits) { return unstack(load_bit_matrix(bits)); }

std::string defaults_text() {
  json d;
  d["mlpvae"] = MlpVaeConfig{};
  d["dcgan"] = DcganConfig{};
  d["abc"] = AbcConfig{};
  d["ga"] = dse::GaConfig{};
  return d.dump(2);
}

// ---- transform ----

struct TransformArgs {
  fs::path csv, schema, out;
  bool drop_constant = false;
};

void run_transform(const TransformArgs& a) {
  Corpus corpus = load_corpus(a.csv, a.schema);
  if (a.drop_constant) {
    auto [kept, dropped] = drop_constant_columns(corpus);
    corpus = std::move(kept);
    for (const auto& name : dropped) std::cerr << "dropped constant column '" << name << "'\n";
  }
  const auto matrices = encode_corpus(corpus);
  save_bit_matrix(stack(matrices), a.out);
  write_text(schema_sidecar(a.out), schema_to_json(corpus.schema));
  std::cout << "wrote " << matrices.size() << " samples of " << matrices.front().rows << "x"
            << matrices.front().cols << " bits to " << a.out.string() << "\n";
}

// ---- train ----

struct TrainArgs {
  std::string model;
  fs::path corpus, config, out;
  std::optional<std::uint64_t> seed;
};

void run_train(const TrainArgs& a) {
  const auto data = load_samples(a.corpus);
  if (data.empty()) throw Error(ErrorKind::kData, "corpus '" + a.corpus.string() + "' holds no samples");
  const std::uint64_t seed = resolve_seed(a.seed);
  fs::create_directories(a.out);
  std::vector<EpochTrace> trace;
  nn::Checkpoint ckpt;
  if (a.model == "mlpvae") {
    auto cfg = config_from<MlpVaeConfig>(a.config);
    cfg.rows = data.front().rows;
    cfg.cols = data.front().cols;
    cfg.seed = seed;
    auto result = train_vae(data, cfg);
    ckpt = result.model.to_checkpoint();
    trace = std::move(result.trace);
  } else {
    auto cfg = config_from<DcganConfig>(a.config);
    cfg.rows = data.front().rows;
    cfg.cols = data.front().cols;
    cfg.seed = seed;
    auto result = train_gan(data, cfg);
    ckpt = result.model.to_checkpoint();
    trace = std::move(result.trace);
  }
  nn::save_checkpoint(ckpt, a.out / "checkpoint");
  write_text(a.out / "trace.csv", traces_to_csv(trace));
  if (fs::exists(schema_sidecar(a.corpus)))
    fs::copy_file(schema_sidecar(a.corpus), a.out / "schema.json", fs::copy_options::overwrite_existing);
  else
    std::cerr << "warning: no schema next to the corpus; generate will need --schema\n";
  std::cout << "trained " << a.model << " for " << trace.size() << " epochs; checkpoint in " << a.out.string()
            << "\n";
}

// ---- generate ----

struct GenerateArgs {
  fs::path checkpoint, schema, out;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
};

void run_generate(const GenerateArgs& a) {
  const fs::path ckpt_file = fs::is_directory(a.checkpoint) ? a.checkpoint / "checkpoint" : a.checkpoint;
  const fs::path schema_path = !a.schema.empty() ? a.schema : ckpt_file.parent_path() / "schema.json";
  const Schema schema = load_schema(schema_path);
  const nn::Checkpoint ckpt = nn::load_checkpoint(ckpt_file);
  std::string kind;
  try {
    kind = json::parse(ckpt.descriptor).at("model").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kData, std::string("unreadable checkpoint descriptor: ") + e.what());
  }
  Rng rng = Rng(resolve_seed(a.seed)).split(3);
  std::vector<BitMatrix> matrices;
  if (kind == "mlpvae") {
    MlpVae model = MlpVae::from_checkpoint(ckpt);
    matrices = generate_vae(model, a.n, rng);
  } else if (kind == "dcgan") {
    Dcgan model = Dcgan::from_checkpoint(ckpt);
    matrices = generate_gan(model, a.n, rng);
  } else {
    throw Error(ErrorKind::kData, "unknown model '" + kind + "' in checkpoint");
  }
  Corpus out;
  out.schema = schema;
  std::size_t invalid = 0;
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    DecodedSample d = decode_sample(matrices[k], schema);
    if (!d.valid) ++invalid;
    d.sample.project_id = "synth-" + std::to_string(k);
    out.samples.push_back(std::move(d.sample));
  }
  save_corpus(out, a.out);
  std::cout << "wrote " << out.samples.size() << " samples to " << a.out.string();
  if (invalid) std::cout << " (" << invalid << " with clamped directive codes)";
  std::cout << "\n";
}

// ---- evaluate ----

struct EvaluateArgs {
  fs::path real, synth, out;
  std::size_t runs = 5;
  std::optional<std::uint64_t> seed;
  std::string generator = "synthetic";
};

// A bit file, or a value-space CSV decoded with the real corpus's schema.
std::vector<BitMatrix> load_synthetic(const fs::path& path, const fs::path& real) {
  if (path.extension() != ".csv") return load_samples(path);
  const Corpus c = load_corpus(path, schema_sidecar(real));
  if (c.samples.empty()) throw Error(ErrorKind::kData, "synthetic CSV '" + path.string() + "' is empty");
  return encode_corpus(c);
}

void run_evaluate(const EvaluateArgs& a) {
  const auto real = to_bit_vectors(load_samples(a.real));
  const auto synth = to_bit_vectors(load_synthetic(a.synth, a.real));
  const FidelityReport report = evaluate_runs([&](std::uint64_t) { return synth; }, real, a.runs,
                                              resolve_seed(a.seed), a.generator, corpus_fingerprint(real));
  const std::string doc = report_to_json(report);
  if (a.out.empty())
    std::cout << doc;
  else
    write_text(a.out, doc);
  std::cerr << "mmd " << report.mean.mmd << "  ssd " << report.mean.ssd << "  prd% " << report.mean.prd << "  coss "
            << report.mean.coss << "\n";
}

// ---- run ----

void run_run(const fs::path& config) {
  const RunConfig cfg = load_run_config(config);
  const FidelityReport report = run_experiment(cfg);
  std::cout << "wrote " << (cfg.out / "report").string() << " (" << report.runs() << " runs, mean mmd "
            << report.mean.mmd << ", coss " << report.mean.coss << ")\n";
}

// ---- dse ----

struct DseArgs {
  fs::path spec, config, out, csv;
  std::optional<std::uint64_t> seed;
  bool brute_force = false;
};

void run_dse(const DseArgs& a) {
  const dse::SystemSpec spec = dse::load_system_spec(a.spec);
  dse::DseReport report;
  if (a.brute_force) {
    spec.validate(false);
    report.front = dse::brute_force_explore(spec);
    report.evaluations = static_cast<std::size_t>(spec.configuration_count());
    if (report.front.empty()) report.diagnostic = "no feasible configuration exists";
  } else {
    auto ga = config_from<dse::GaConfig>(a.config);
    ga.seed = resolve_seed(a.seed);
    report = dse::ga_explore(spec, ga);
  }
  const std::string doc = dse::report_to_json(report, spec);
  if (a.out.empty())
    std::cout << doc;
  else
    write_text(a.out, doc);
  if (!a.csv.empty()) write_text(a.csv, dse::front_to_csv(report, spec));
  if (!report.diagnostic.empty()) std::cerr << "note: " << report.diagnostic << "\n";
}

// ---- compare ----

struct CompareArgs {
  std::vector<fs::path> reports;
  fs::path spec, ga, models, out;
  std::vector<std::string> generators{"mlpvae", "dcgan", "abc", "gaussian"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

void run_compare(const CompareArgs& a) {
  if (!a.reports.empty() && !a.spec.empty())
    throw Error(ErrorKind::kInvalidArgument, "compare: give either --reports or --spec, not both");
  if (!a.reports.empty()) {
    std::vector<FidelityReport> reports;
    for (const auto& p : a.reports) {
      const fs::path file = fs::is_directory(p) ? p / "report" : p;
      reports.push_back(report_from_json(read_text(file)));
    }
    const ComparisonTable table = compare_table(reports);
    std::cout << table_to_text(table);
    if (!a.out.empty()) write_text(a.out, table_to_json(table));
    return;
  }
  if (a.spec.empty()) throw Error(ErrorKind::kInvalidArgument, "compare: --reports or --spec is required");
  const dse::SystemSpec spec = dse::load_system_spec(a.spec);
  const json models = a.models.empty() ? json::object() : read_json(a.models);
  std::vector<dse::GeneratorDescriptor> gens;
  try {
    for (const auto& key : models.items())
      if (key.key() != "mlpvae" && key.key() != "dcgan" && key.key() != "abc")
        throw Error(ErrorKind::kSchema, "models file: unknown key '" + key.key() + "'");
    for (const auto& kind : a.generators) {
      dse::GeneratorDescriptor g;
      g.kind = kind;
      if (models.contains("mlpvae")) g.mlpvae = models.at("mlpvae").get<MlpVaeConfig>();
      if (models.contains("dcgan")) g.dcgan = models.at("dcgan").get<DcganConfig>();
      if (models.contains("abc")) g.abc = models.at("abc").get<AbcConfig>();
      gens.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("models file: ") + e.what());
  }
  const auto result = dse::synth_system_compare(spec, gens, a.seeds, config_from<dse::GaConfig>(a.ga));
  std::cout << dse::compare_to_text(result);
  if (!a.out.empty()) write_text(a.out, dse::compare_to_json(result));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic HLS design-point data: encode, train, generate, score and explore."};
  app.require_subcommand(1);
  app.footer("Seeds: --seed, else the HLSFORGE_SEED environment variable, else 0.\n"
             "Model and search defaults (override with a JSON --config holding any subset of keys):\n" +
             defaults_text());

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "Encode a value-space CSV into a stacked bit-matrix file");
  transform->add_option("--csv", ta.csv, "Input CSV")->required()->check(CLI::ExistingFile);
  transform->add_option("--schema", ta.schema, "Schema JSON for the CSV")->required()->check(CLI::ExistingFile);
  transform->add_option("--out", ta.out, "Output bit file; the schema is copied to <out>.schema.json")->required();
  transform->add_flag("--drop-constant", ta.drop_constant, "Drop variables that never vary");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a generative model on a bit-matrix corpus");
  train->add_option("--model", tr.model, "mlpvae or dcgan")->required()->check(CLI::IsMember({"mlpvae", "dcgan"}));
  train->add_option("--corpus", tr.corpus, "Bit file written by transform")->required()->check(CLI::ExistingFile);
  train->add_option("--config", tr.config, "Model config JSON; defaults are listed by hlsforge --help")->check(CLI::ExistingFile);
  train->add_option("--seed", tr.seed, "Seed");
  train->add_option("--out", tr.out, "Output directory: checkpoint, trace.csv, schema.json")->required();

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Sample a trained model into a value-space CSV");
  generate->add_option("--checkpoint", ga.checkpoint, "Training output directory or checkpoint file")
      ->required()
      ->check(CLI::ExistingPath);
  generate->add_option("--n", ga.n, "Number of samples")->required();
  generate->add_option("--seed", ga.seed, "Seed");
  generate->add_option("--schema", ga.schema, "Schema JSON (default: schema.json beside the checkpoint)");
  generate->add_option("--out", ga.out, "Output CSV")->required();

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Score synthetic data against real data");
  evaluate->add_option("--real", ea.real, "Real bit file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--synth", ea.synth, "Synthetic bit file, or CSV in the real schema")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--runs", ea.runs, "Pairing repetitions")->capture_default_str()->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", ea.seed, "Base seed");
  evaluate->add_option("--generator", ea.generator, "Label stored in the report")->capture_default_str();
  evaluate->add_option("--out", ea.out, "Report file (default: stdout)");

  fs::path run_config;
  auto* run = app.add_subcommand("run", "Run a full experiment from a run config");
  run->add_option("--config", run_config, "Run config JSON")->required()->check(CLI::ExistingFile);

  DseArgs da;
  auto* dse_cmd = app.add_subcommand("dse", "Explore a multi-component system for its energy/area front");
  dse_cmd->add_option("--spec", da.spec, "System spec JSON")->required()->check(CLI::ExistingFile);
  dse_cmd->add_option("--config", da.config, "GA config JSON; defaults are listed by hlsforge --help")->check(CLI::ExistingFile);
  dse_cmd->add_option("--seed", da.seed, "Seed");
  dse_cmd->add_flag("--brute-force", da.brute_force, "Enumerate every configuration instead");
  dse_cmd->add_option("--out", da.out, "Report file (default: stdout)");
  dse_cmd->add_option("--csv", da.csv, "Front as CSV");

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "Fidelity table over reports, or ADRS table over generators");
  compare->add_option("--reports", ca.reports, "Report files or experiment directories")->check(CLI::ExistingPath);
  compare->add_option("--spec", ca.spec, "System spec JSON (ADRS mode)")->check(CLI::ExistingFile);
  compare->add_option("--generators", ca.generators, "identity, gaussian, abc, mlpvae, dcgan")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--seeds", ca.seeds, "Seeds per generator")->delimiter(',')->capture_default_str();
  compare->add_option("--ga", ca.ga, "GA config JSON")->check(CLI::ExistingFile);
  compare->add_option("--models", ca.models, "JSON with optional mlpvae, dcgan and abc configs")
      ->check(CLI::ExistingFile);
  compare->add_option("--out", ca.out, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*transform) run_transform(ta);
    else if (*train) run_train(tr);
    else if (*generate) run_generate(ga);
    else if (*evaluate) run_evaluate(ea);
    else if (*run) run_run(run_config);
    else if (*dse_cmd) run_dse(da);
    else if (*compare) run_compare(ca);
  } catch (const Error& e) {
    std::cerr << "hlsforge: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "hlsforge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
