#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "hlsforge/error.hpp"
#include "hlsforge/harness.hpp"

using namespace hlsforge;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("hlsforge_harness_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig gaussian_config(const fs::path& out) {
  RunConfig cfg;
  cfg.generator = "gaussian";
  cfg.out = out;
  cfg.base_seed = 10;
  return cfg;
}

}  // namespace

TEST_CASE("gaussian experiment writes every run") {
  TempDir tmp("gauss");
  const Corpus corpus = testing::bimodal_corpus(60, 1);
  const auto report = run_experiment(corpus, gaussian_config(tmp.path / "out"));
  CHECK(report.runs() == 5);
  CHECK(report.generator == "gaussian");
  CHECK(report.seeds == std::vector<std::uint64_t>{10, 11, 12, 13, 14});
  for (int k = 0; k < 5; ++k) CHECK(fs::exists(tmp.path / "out" / ("run" + std::to_string(k)) / "trace.csv"));
  CHECK(report_from_json(slurp(tmp.path / "out" / "report")) == report);
  for (const auto& m : report.per_run) {
    CHECK(m.mmd >= 0.0);
    CHECK(m.coss > 0.0);
    CHECK(m.coss <= 1.0);
    CHECK(m.value_mmd > 0.0);
  }
}

TEST_CASE("experiments rerun byte for byte") {
  TempDir tmp("rerun");
  const Corpus corpus = testing::bimodal_corpus(60, 2);
  auto cfg = gaussian_config(tmp.path / "a");
  cfg.generator = "abc";
  cfg.runs = 2;
  run_experiment(corpus, cfg);
  cfg.out = tmp.path / "b";
  run_experiment(corpus, cfg);
  CHECK(slurp(tmp.path / "a" / "report") == slurp(tmp.path / "b" / "report"));
}

TEST_CASE("mlpvae experiment at reduced scale") {
  TempDir tmp("vae");
  const Corpus corpus = testing::bimodal_corpus(40, 3);
  RunConfig cfg;
  cfg.generator = "mlpvae";
  cfg.out = tmp.path / "out";
  cfg.runs = 1;
  cfg.mlpvae.hidden_sizes = {32, 16};
  cfg.mlpvae.epochs = 2;
  cfg.mlpvae.trace_samples = 8;
  const auto report = run_experiment(corpus, cfg);
  CHECK(report.runs() == 1);
  CHECK(fs::file_size(tmp.path / "out" / "run0" / "checkpoint") > 0);
  const std::string trace = slurp(tmp.path / "out" / "run0" / "trace.csv");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 3);
}

TEST_CASE("run config files") {
  TempDir tmp("cfg");
  const Corpus corpus = testing::bimodal_corpus(30, 4);
  save_corpus(corpus, tmp.path / "real.csv");
  {
    std::ofstream(tmp.path / "real.schema.json") << schema_to_json(corpus.schema);
    std::ofstream(tmp.path / "run.json") << R"({"corpus": "real.csv", "schema": "real.schema.json",
      "generator": "abc", "runs": 2, "base_seed": 3, "out": "res", "model": {"epsilon": 0.2}})";
  }
  const RunConfig cfg = load_run_config(tmp.path / "run.json");
  CHECK(cfg.corpus == tmp.path / "real.csv");
  CHECK(cfg.abc.epsilon == 0.2);
  CHECK(cfg.runs == 2);
  const auto report = run_experiment(cfg);
  CHECK(report.runs() == 2);
  CHECK(fs::exists(tmp.path / "res" / "report"));

  CHECK_THROWS_AS(parse_run_config(R"({"corpus": "a", "schema": "b", "generator": "gaussian", "out": "o", "bogus": 1})", {}),
                  Error);
  CHECK_THROWS_AS(parse_run_config(R"({"corpus": "a", "schema": "b", "generator": "vae", "out": "o"})", {}), Error);
  CHECK_THROWS_AS(parse_run_config(R"({"corpus": "a", "schema": "b", "generator": "mlpvae", "out": "o",
      "model": {"latent": 3}})", {}), Error);
}

TEST_CASE("a failed experiment leaves no partial output") {
  TempDir tmp("fail");
  const Corpus corpus = testing::bimodal_corpus(30, 5);
  auto cfg = gaussian_config(tmp.path / "out");
  cfg.generator = "abc";
  cfg.abc.epsilon = 0.0;
  cfg.abc.max_trials = 10;
  CHECK_THROWS_AS(run_experiment(corpus, cfg), Error);
  CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("comparison table") {
  FidelityReport a, b, c;
  a.generator = "a";
  b.generator = "b";
  a.corpus_id = b.corpus_id = c.corpus_id = "id";
  c.generator = "c";
  a.mean = {0.1, 5.0, 40.0, 0.8, 0.0};
  b.mean = {0.1, 4.0, 50.0, 0.7, 0.0};
  c.mean = {0.3, 6.0, 30.0, 0.8, 0.0};
  const std::vector<FidelityReport> reports{a, b, c};
  const auto t = compare_table(reports);
  CHECK(t.best[0] == std::vector<bool>{true, true, false});   // MMD tie
  CHECK(t.best[1] == std::vector<bool>{false, true, false});  // SSD
  CHECK(t.best[2] == std::vector<bool>{false, false, true});  // PRD
  CHECK(t.best[3] == std::vector<bool>{true, false, true});   // COSS, higher is better
  const std::string text = table_to_text(t);
  CHECK(text.find("| a |") != std::string::npos);
  CHECK(table_to_json(t).find("\"best\": true") != std::string::npos);

  CHECK_THROWS_AS(compare_table(std::vector<FidelityReport>{a}), Error);
  c.corpus_id = "other";
  CHECK_THROWS_AS(compare_table(std::vector<FidelityReport>{a, c}), Error);
}
