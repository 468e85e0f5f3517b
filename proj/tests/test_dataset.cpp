#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "hlsforge/dataset.hpp"
#include "hlsforge/error.hpp"

using namespace hlsforge;

namespace {

const char* kBicgSchema = R"({
  "part": "xc7v585tffg1157-3",
  "variables": [
    {"name": "BRAM", "kind": "integer"},
    {"name": "DP", "unit": "mW"}
  ],
  "directives": [
    {"name": "loop1", "options": [{"name": "pipeline", "domain": ["off", "on"]},
                                  {"name": "unroll", "domain": [1, 2, 4, 8, 16]}]},
    {"name": "arr", "options": [{"name": "partition", "domain": ["none", "block", "cyclic"]}]}
  ]
})";

std::string table2_csv() {
  std::string header = "project_id", row = "io1-l2n1n1-l4n1n1";
  const Schema s = testing::table2_schema();
  const HlsSample t = testing::table2_sample();
  for (std::size_t i = 0; i < s.variables.size(); ++i) {
    header += "," + s.variables[i].name;
    row += "," + format_real(t.values[i]);
  }
  return header + "\n" + row + "\n";
}

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("load single worked-example row") {
  const Corpus c = parse_corpus(table2_csv(), testing::table2_schema());
  REQUIRE(c.size() == 1);
  CHECK(c.value(0, "Clk-estimated") == 8.419);
  CHECK(c.value(0, "BRAM") == 32);
  CHECK(c.value(0, "DSP") == 5);
  CHECK(c.samples[0].project_id == "io1-l2n1n1-l4n1n1");
}

TEST_CASE("load from files and roundtrip through save") {
  const auto dir = std::filesystem::temp_directory_path() / "hlsforge_dataset_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "schema.json") << schema_to_json(testing::table2_schema());
  }
  const Corpus a = testing::bimodal_corpus(50, 3);
  save_corpus(a, dir / "data.csv");
  const Corpus b = load_corpus(dir / "data.csv", dir / "schema.json");
  CHECK(b.samples == a.samples);
  CHECK(format_corpus(b) == format_corpus(a));
  // Loading is deterministic.
  CHECK(load_corpus(dir / "data.csv", dir / "schema.json").samples == b.samples);
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty corpus and range errors") {
  const Schema s = testing::table2_schema();
  const std::string header = table2_csv().substr(0, table2_csv().find('\n') + 1);
  CHECK(error_of([&] { parse_corpus(header, s); }) == "empty corpus");

  std::string csv = table2_csv();
  csv.replace(csv.find(",32,5,"), 6, ",-1,5,");
  const std::string msg = error_of([&] { parse_corpus(csv, s); });
  CHECK(msg.find("row 1") != std::string::npos);
  CHECK(msg.find("'BRAM'") != std::string::npos);
}

TEST_CASE("unparseable cells, missing columns and integer kinds") {
  const Schema s = parse_schema(R"({"variables": [{"name": "a", "kind": "integer"}, {"name": "b"}]})");
  CHECK(error_of([&] { parse_corpus("a,b\n1,x\n", s); }).find("column 'b'") != std::string::npos);
  CHECK(error_of([&] { parse_corpus("a\n1\n", s); }).find("missing column 'b'") != std::string::npos);
  CHECK(error_of([&] { parse_corpus("a,b\n1.5,2\n", s); }).find("integer") != std::string::npos);
  CHECK(error_of([&] { parse_corpus("a,b\n1,2\n3,1048576\n", s); }).find("row 2") != std::string::npos);
}

TEST_CASE("csv quoting, CRLF and BOM") {
  const Schema s = parse_schema(R"({"variables": [{"name": "x,y"}]})");
  const Corpus c = parse_corpus("\xEF\xBB\xBFproject_id,\"x,y\"\r\n\"p \"\"1\"\"\",2.5\r\n", s);
  REQUIRE(c.size() == 1);
  CHECK(c.samples[0].project_id == "p \"1\"");
  CHECK(c.samples[0].values[0] == 2.5);
  CHECK(parse_corpus(format_corpus(c), s).samples == c.samples);
}

TEST_CASE("schema invariants") {
  CHECK_THROWS_AS(parse_schema(R"({"variables": []})"), Error);
  CHECK_THROWS_AS(parse_schema(R"({"variables": [{"name": "a"}, {"name": "a"}]})"), Error);
  CHECK_THROWS_AS(parse_schema(R"({"variables": [{"name": "a", "min": -1}]})"), Error);
  CHECK_THROWS_AS(parse_schema(R"({"variables": [{"name": "a", "min": 3, "max": 2}]})"), Error);
  // Nine options do not fit 32 bits at four bits each.
  std::string opts;
  for (int i = 0; i < 9; ++i) opts += std::string(i ? "," : "") + R"({"name": "o)" + std::to_string(i) + R"(", "domain": [0]})";
  CHECK_THROWS_AS(parse_schema(R"({"variables": [{"name": "a"}], "directives": [{"name": "d", "options": [)" + opts + "]}]}"),
                  Error);
  const Schema s = parse_schema(kBicgSchema);
  CHECK(parse_schema(schema_to_json(s)).variables.size() == 2);
  CHECK(s.variables[1].max == kDefaultVariableMax);
}

TEST_CASE("drop_constant_columns") {
  Corpus c;
  c.schema = parse_schema(R"({"variables": [{"name": "a"}, {"name": "clock"}, {"name": "b"},
                                             {"name": "unc"}, {"name": "freq"}]})");
  c.samples = {{"p1", "", {1, 10, 3, 1.25, 100}, {}}, {"p2", "", {2, 10, 4, 1.25, 100}, {}}};
  auto [out, dropped] = drop_constant_columns(c);
  CHECK(out.schema.variables.size() == 2);
  CHECK(dropped == std::vector<std::string>{"clock", "unc", "freq"});
  // Idempotent.
  auto [again, none] = drop_constant_columns(out);
  CHECK(none.empty());
  CHECK(again.samples == out.samples);

  Corpus flat = c;
  flat.samples[1].values = flat.samples[0].values;
  CHECK(error_of([&] { drop_constant_columns(flat); }) == "no varying variables");
}

TEST_CASE("split_by_directives") {
  const Schema s = parse_schema(kBicgSchema);
  const std::string csv =
      "project_id,BRAM,DP,dir.loop1.pipeline,dir.loop1.unroll,dir.arr.partition\n"
      "io1-a,1,2.5,,,\n"
      "bicg-1,2,3,on,8,cyclic\n"
      "bicg-2,3,4,off,1,none\n"
      "gemm-1,3,4,,,block\n";
  const Corpus c = parse_corpus(csv, s);
  CHECK(c.samples[1].directives[0] == DirectiveSetting{1, 3});
  const auto split = split_by_directives(c);
  CHECK(split.plain.size() == 1);
  REQUIRE(split.by_benchmark.count("bicg") == 1);
  CHECK(split.by_benchmark.at("bicg").size() == 2);
  CHECK(split.by_benchmark.at("bicg").schema.directive_count() == 2);
  CHECK(split.by_benchmark.at("gemm").schema.directive_count() == 1);

  const std::string bad = csv + "bicg-3,3,4,,,none\n";
  CHECK(error_of([&] { split_by_directives(parse_corpus(bad, s)); }).find("inconsistent directive count") !=
        std::string::npos);

  const Corpus plain = testing::bimodal_corpus(5, 1);
  const auto none = split_by_directives(plain);
  CHECK(none.plain.samples == plain.samples);
  CHECK(none.by_benchmark.empty());
}

TEST_CASE("directive cells must be in their domains") {
  const Schema s = parse_schema(kBicgSchema);
  CHECK_THROWS_AS(parse_corpus("project_id,BRAM,DP,dir.loop1.pipeline,dir.loop1.unroll,dir.arr.partition\n"
                               "x-1,1,1,on,3,none\n",
                               s),
                  Error);
  // A partially specified directive is rejected.
  CHECK_THROWS_AS(parse_corpus("project_id,BRAM,DP,dir.loop1.pipeline,dir.loop1.unroll,dir.arr.partition\n"
                               "x-1,1,1,on,,none\n",
                               s),
                  Error);
}

TEST_CASE("benchmark identity") {
  HlsSample s;
  s.project_id = "syr2k-opt-3";
  CHECK(benchmark_of(s) == "syr2k");
  s.benchmark = "k3mm";
  CHECK(benchmark_of(s) == "k3mm");
}
