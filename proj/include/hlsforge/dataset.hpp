#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hlsforge {

enum class VariableKind { kInteger, kReal };

// Largest value representable in unsigned Q20.12.
inline constexpr double kDefaultVariableMax = 1048576.0 - 1.0 / 4096.0;

struct VariableSchema {
  std::string name;
  std::string unit;
  VariableKind kind = VariableKind::kReal;
  double min = 0.0;
  double max = kDefaultVariableMax;
};

struct DirectiveOption {
  std::string name;
  std::vector<std::string> domain;  // order defines the 4-bit code
};

struct Directive {
  std::string name;
  std::vector<DirectiveOption> options;  // 1..8 entries
};

struct DirectiveSchema {
  std::vector<Directive> directives;
};

struct Schema {
  std::vector<VariableSchema> variables;
  std::optional<DirectiveSchema> directives;
  std::string part_id;

  // Throws Error(kSchema) when an invariant is violated.
  void validate() const;
  std::optional<std::size_t> variable_index(const std::string& name) const;
  std::size_t directive_count() const {
    return directives ? directives->directives.size() : 0;
  }
};

// Ordinal code of each option value of one directive; an empty vector means
// the directive is not applied to this design point.
using DirectiveSetting = std::vector<int>;

struct HlsSample {
  std::string project_id;
  std::string benchmark;             // empty when unknown
  std::vector<double> values;        // aligned with Schema::variables
  std::vector<DirectiveSetting> directives;  // aligned with directive schema, or empty

  std::size_t applied_directive_count() const;
  bool operator==(const HlsSample&) const = default;
};

struct Corpus {
  Schema schema;
  std::vector<HlsSample> samples;

  const std::string& part_id() const { return schema.part_id; }
  std::size_t size() const { return samples.size(); }
  double value(std::size_t sample, const std::string& variable) const;

  // Validates every sample against the schema; throws Error(kData).
  void validate() const;
};

// Schema file: JSON document with "part", "variables" and optional
// "directives". Missing min/max take the Q20.12 defaults.
Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(const std::string& json_text);
std::string schema_to_json(const Schema& schema);

// Reads a CSV with header. Variable columns are looked up by name; directive
// columns are named "dir.<directive>.<option>". Optional "project_id" and
// "benchmark" columns.
Corpus load_corpus(const std::filesystem::path& csv_path,
                   const std::filesystem::path& schema_path);
Corpus parse_corpus(const std::string& csv_text, const Schema& schema);

// Writes columns in schema order with shortest round-trip reals.
std::string format_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& csv_path);

std::pair<Corpus, std::vector<std::string>> drop_constant_columns(const Corpus& corpus);

struct DirectiveSplit {
  Corpus plain;                             // samples with no directives applied
  std::map<std::string, Corpus> by_benchmark;  // restricted directive schemas
};

DirectiveSplit split_by_directives(const Corpus& corpus);

// Benchmark identity: the explicit column when present, otherwise the
// project id prefix before the first '-'.
std::string benchmark_of(const HlsSample& sample);

// Shortest representation that parses back to the same double.
std::string format_real(double v);

}  // namespace hlsforge
