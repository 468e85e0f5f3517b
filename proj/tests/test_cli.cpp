#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "hlsforge/codec.hpp"
#include "hlsforge/dataset.hpp"
#include "hlsforge/dse.hpp"
#include "hlsforge/fidelity.hpp"

using namespace hlsforge;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "hlsforge_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI inside the work directory; returns its exit status.
int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = "cd '" + workdir().string() + "' && " + env + " '" HLSFORGE_CLI_PATH "' " + args +
                          " > last.out 2> last.err";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(workdir() / p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(workdir() / p, std::ios::binary) << text; }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("transform encodes the worked example row") {
  Corpus c;
  c.schema = testing::table2_schema();
  c.samples = {testing::table2_sample()};
  save_corpus(c, workdir() / "row.csv");
  put("row.schema.json", schema_to_json(c.schema));
  REQUIRE(cli("transform --csv row.csv --schema row.schema.json --out row.hlsb") == 0);
  const auto m = unstack(load_bit_matrix(workdir() / "row.hlsb"));
  REQUIRE(m.size() == 1);
  CHECK(m[0].rows == 20);
  CHECK(m[0].cols == 32);
  CHECK(m[0] == encode_sample(testing::table2_sample(), c.schema));
  CHECK(fs::exists(workdir() / "row.hlsb.schema.json"));

  CHECK(cli("transform --csv missing.csv --schema row.schema.json --out x.hlsb") != 0);
}

TEST_CASE("train, generate and evaluate") {
  const Corpus c = testing::bimodal_corpus(40, 1);
  save_corpus(c, workdir() / "toy.csv");
  put("toy.schema.json", schema_to_json(c.schema));
  REQUIRE(cli("transform --csv toy.csv --schema toy.schema.json --out toy.hlsb") == 0);
  put("vae.json", R"({"hidden_sizes": [32, 16], "epochs": 2, "trace_samples": 8})");
  REQUIRE(cli("train --model mlpvae --corpus toy.hlsb --config vae.json --seed 3 --out vae") == 0);
  for (const char* f : {"vae/checkpoint", "vae/trace.csv", "vae/schema.json"}) CHECK(fs::exists(workdir() / f));
  CHECK(lines(slurp("vae/trace.csv")) == 3);

  REQUIRE(cli("generate --checkpoint vae --n 7 --seed 4 --out synth.csv") == 0);
  const std::string synth = slurp("synth.csv");
  CHECK(lines(synth) == 8);
  CHECK(load_corpus(workdir() / "synth.csv", workdir() / "toy.schema.json").size() == 7);

  REQUIRE(cli("generate --checkpoint vae --n 7 --out env.csv", "HLSFORGE_SEED=4") == 0);
  CHECK(slurp("env.csv") == synth);
  CHECK(cli("generate --checkpoint vae --n 7 --out bad.csv", "HLSFORGE_SEED=abc") != 0);
  CHECK(slurp("last.err").find("HLSFORGE_SEED") != std::string::npos);

  REQUIRE(cli("generate --checkpoint vae --n 0 --seed 4 --out empty.csv") == 0);
  CHECK(lines(slurp("empty.csv")) == 1);

  REQUIRE(cli("evaluate --real toy.hlsb --synth synth.csv --runs 2 --seed 1 --generator vae --out vae.report") == 0);
  const FidelityReport r = report_from_json(slurp("vae.report"));
  CHECK(r.runs() == 2);
  CHECK(r.generator == "vae");

  put("gauss.json", R"({"corpus": "toy.csv", "schema": "toy.schema.json", "generator": "gaussian",
    "runs": 2, "out": "gauss"})");
  REQUIRE(cli("run --config gauss.json") == 0);
  put("abc.json", R"({"corpus": "toy.csv", "schema": "toy.schema.json", "generator": "abc",
    "runs": 2, "out": "abc"})");
  REQUIRE(cli("run --config abc.json") == 0);
  REQUIRE(cli("compare --reports gauss abc --out table") == 0);
  CHECK(slurp("last.out").find("| gaussian |") != std::string::npos);
  CHECK(fs::exists(workdir() / "table"));
  CHECK(cli("compare --reports gauss vae.report") == 0);
  // A report scored on another corpus cannot join the table.
  REQUIRE(cli("evaluate --real row.hlsb --synth row.hlsb --runs 1 --out row.report") == 0);
  CHECK(cli("compare --reports gauss row.report") != 0);
  CHECK(slurp("last.err").find("corpus") != std::string::npos);
}

TEST_CASE("dse commands") {
  const dse::SystemSpec spec = testing::random_spec(4, 5, 7);
  put("sys.json", dse::system_spec_to_json(spec));
  REQUIRE(cli("dse --spec sys.json --brute-force --out brute.json --csv brute.csv") == 0);
  dse::DseReport oracle;
  oracle.front = dse::brute_force_explore(spec);
  oracle.evaluations = 625;
  CHECK(slurp("brute.json") == dse::report_to_json(oracle, spec));
  CHECK(lines(slurp("brute.csv")) == oracle.front.size() + 1);

  put("ga.json", R"({"population": 40, "generations": 30})");
  REQUIRE(cli("dse --spec sys.json --config ga.json --seed 2 --out ga1.json") == 0);
  REQUIRE(cli("dse --spec sys.json --config ga.json --seed 2 --out ga2.json") == 0);
  CHECK(slurp("ga1.json") == slurp("ga2.json"));

  REQUIRE(cli("compare --spec sys.json --generators identity,gaussian --seeds 1,2 --ga ga.json --out adrs.json") == 0);
  CHECK(slurp("last.out").find("identity") != std::string::npos);
  CHECK(fs::exists(workdir() / "adrs.json"));

  put("bad_ga.json", R"({"popsize": 40})");
  CHECK(cli("dse --spec sys.json --config bad_ga.json") != 0);
  CHECK(slurp("last.err").find("popsize") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(cli("") != 0);
  CHECK(cli("train --model gpt --corpus toy.hlsb --out x") != 0);
  CHECK(cli("frobnicate") != 0);
  REQUIRE(cli("train --help") == 0);
  CHECK(slurp("last.out").find("--seed") != std::string::npos);
  REQUIRE(cli("--help") == 0);
  CHECK(slurp("last.out").find("\"latent_dim\": 16") != std::string::npos);
}
