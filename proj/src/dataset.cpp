#include "hlsforge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hlsforge/error.hpp"
#include "json.hpp"

namespace hlsforge {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxOptionsPerDirective = 8;
constexpr std::size_t kMaxDomainSize = 16;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// RFC 4180 style: quoted fields may contain commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // Skip blank lines.
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  std::size_t i = 0;
  // UTF-8 byte order mark.
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // Tolerate CRLF.
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::kData, "unterminated quoted field in CSV");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string cell_ref(std::size_t data_row, const std::string& column) {
  // data_row is 1-based; the header occupies line 1.
  return "row " + std::to_string(data_row) + " (line " + std::to_string(data_row + 1) +
         "), column '" + column + "'";
}

int domain_ordinal(const DirectiveOption& option, const std::string& raw) {
  const std::string value = trim(raw);
  for (std::size_t k = 0; k < option.domain.size(); ++k) {
    if (option.domain[k] == value) return static_cast<int>(k);
  }
  // Numeric domains match by value so "8" and "8.0" agree.
  if (auto v = parse_double(value)) {
    for (std::size_t k = 0; k < option.domain.size(); ++k) {
      if (auto d = parse_double(option.domain[k]); d && *d == *v) return static_cast<int>(k);
    }
  }
  return -1;
}

std::string directive_column(const Directive& d, const DirectiveOption& o) {
  return "dir." + d.name + "." + o.name;
}

VariableKind parse_kind(const std::string& s) {
  if (s == "integer" || s == "int") return VariableKind::kInteger;
  if (s == "real") return VariableKind::kReal;
  throw Error(ErrorKind::kSchema, "unknown variable kind '" + s + "'");
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(ErrorKind::kInvalidArgument, "cannot format value");
  return std::string(buf, ptr);
}

void Schema::validate() const {
  if (variables.empty()) throw Error(ErrorKind::kSchema, "schema declares no variables");
  std::set<std::string> names;
  for (const auto& v : variables) {
    if (v.name.empty()) throw Error(ErrorKind::kSchema, "variable with empty name");
    if (!names.insert(v.name).second)
      throw Error(ErrorKind::kSchema, "duplicate variable '" + v.name + "'");
    if (!(v.min <= v.max))
      throw Error(ErrorKind::kSchema, "variable '" + v.name + "': min > max");
    if (v.min < 0.0)
      throw Error(ErrorKind::kSchema, "variable '" + v.name + "': min must be non-negative");
  }
  if (!directives) return;
  std::set<std::string> dnames;
  for (const auto& d : directives->directives) {
    if (!dnames.insert(d.name).second)
      throw Error(ErrorKind::kSchema, "duplicate directive '" + d.name + "'");
    if (d.options.empty() || d.options.size() > kMaxOptionsPerDirective)
      throw Error(ErrorKind::kSchema, "directive '" + d.name + "' must have 1-8 options");
    std::set<std::string> onames;
    for (const auto& o : d.options) {
      if (!onames.insert(o.name).second)
        throw Error(ErrorKind::kSchema, "directive '" + d.name + "': duplicate option '" + o.name + "'");
      if (o.domain.empty() || o.domain.size() > kMaxDomainSize)
        throw Error(ErrorKind::kSchema,
                    "directive '" + d.name + "' option '" + o.name + "' must have 1-16 values");
    }
  }
}

std::optional<std::size_t> Schema::variable_index(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t HlsSample::applied_directive_count() const {
  return static_cast<std::size_t>(
      std::count_if(directives.begin(), directives.end(), [](const auto& d) { return !d.empty(); }));
}

double Corpus::value(std::size_t sample, const std::string& variable) const {
  auto idx = schema.variable_index(variable);
  if (!idx) throw Error(ErrorKind::kInvalidArgument, "unknown variable '" + variable + "'");
  return samples.at(sample).values.at(*idx);
}

void Corpus::validate() const {
  schema.validate();
  if (samples.empty()) throw Error(ErrorKind::kData, "empty corpus");
  const std::size_t ndir = schema.directive_count();
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& s = samples[r];
    if (s.values.size() != schema.variables.size())
      throw Error(ErrorKind::kData, "sample " + std::to_string(r + 1) + ": wrong variable count");
    for (std::size_t c = 0; c < s.values.size(); ++c) {
      const auto& var = schema.variables[c];
      const double v = s.values[c];
      if (!std::isfinite(v) || v < var.min || v > var.max)
        throw Error(ErrorKind::kData, cell_ref(r + 1, var.name) + ": value " + format_real(v) +
                                          " outside [" + format_real(var.min) + ", " +
                                          format_real(var.max) + "]");
    }
    if (!s.directives.empty() && s.directives.size() != ndir)
      throw Error(ErrorKind::kData, "sample " + std::to_string(r + 1) + ": wrong directive count");
    for (std::size_t d = 0; d < s.directives.size(); ++d) {
      const auto& setting = s.directives[d];
      if (setting.empty()) continue;
      const auto& dir = schema.directives->directives[d];
      if (setting.size() != dir.options.size())
        throw Error(ErrorKind::kData, "sample " + std::to_string(r + 1) + ": directive '" +
                                          dir.name + "' has wrong option count");
      for (std::size_t o = 0; o < setting.size(); ++o) {
        if (setting[o] < 0 || static_cast<std::size_t>(setting[o]) >= dir.options[o].domain.size())
          throw Error(ErrorKind::kData,
                      cell_ref(r + 1, directive_column(dir, dir.options[o])) + ": value not in domain");
      }
    }
  }
}

Schema parse_schema(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("schema parse error: ") + e.what());
  }
  Schema schema;
  try {
    schema.part_id = doc.value("part", std::string{});
    for (const auto& v : doc.at("variables")) {
      VariableSchema var;
      var.name = v.at("name").get<std::string>();
      var.unit = v.value("unit", std::string{});
      var.kind = parse_kind(v.value("kind", std::string("real")));
      var.min = v.value("min", 0.0);
      var.max = v.value("max", kDefaultVariableMax);
      schema.variables.push_back(std::move(var));
    }
    if (doc.contains("directives")) {
      DirectiveSchema ds;
      for (const auto& d : doc.at("directives")) {
        Directive dir;
        dir.name = d.at("name").get<std::string>();
        for (const auto& o : d.at("options")) {
          DirectiveOption opt;
          opt.name = o.at("name").get<std::string>();
          for (const auto& val : o.at("domain")) {
            opt.domain.push_back(val.is_string() ? val.get<std::string>() : val.dump());
          }
          dir.options.push_back(std::move(opt));
        }
        ds.directives.push_back(std::move(dir));
      }
      schema.directives = std::move(ds);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("schema field error: ") + e.what());
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::filesystem::path& path) { return parse_schema(read_file(path)); }

std::string schema_to_json(const Schema& schema) {
  json doc;
  doc["part"] = schema.part_id;
  doc["variables"] = json::array();
  for (const auto& v : schema.variables) {
    doc["variables"].push_back({{"name", v.name},
                                {"unit", v.unit},
                                {"kind", v.kind == VariableKind::kInteger ? "integer" : "real"},
                                {"min", v.min},
                                {"max", v.max}});
  }
  if (schema.directives) {
    doc["directives"] = json::array();
    for (const auto& d : schema.directives->directives) {
      json opts = json::array();
      for (const auto& o : d.options) opts.push_back({{"name", o.name}, {"domain", o.domain}});
      doc["directives"].push_back({{"name", d.name}, {"options", opts}});
    }
  }
  return doc.dump(2) + "\n";
}

Corpus parse_corpus(const std::string& csv_text, const Schema& schema) {
  schema.validate();
  const auto rows = parse_csv(csv_text);
  if (rows.empty()) throw Error(ErrorKind::kData, "CSV has no header row");
  const auto& header = rows.front();
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) column.emplace(trim(header[c]), c);

  std::vector<std::size_t> var_cols;
  for (const auto& v : schema.variables) {
    auto it = column.find(v.name);
    if (it == column.end()) throw Error(ErrorKind::kData, "missing column '" + v.name + "'");
    var_cols.push_back(it->second);
  }
  // Directive option columns; absent columns mean the option is never set.
  std::vector<std::vector<std::optional<std::size_t>>> dir_cols;
  if (schema.directives) {
    for (const auto& d : schema.directives->directives) {
      auto& cols = dir_cols.emplace_back();
      for (const auto& o : d.options) {
        auto it = column.find(directive_column(d, o));
        cols.push_back(it == column.end() ? std::nullopt : std::optional(it->second));
      }
    }
  }
  const auto id_col = column.count("project_id") ? std::optional(column.at("project_id")) : std::nullopt;
  const auto bench_col = column.count("benchmark") ? std::optional(column.at("benchmark")) : std::nullopt;

  Corpus corpus;
  corpus.schema = schema;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](std::size_t c) -> std::string { return c < row.size() ? row[c] : std::string{}; };
    HlsSample s;
    s.project_id = id_col ? trim(cell(*id_col)) : std::to_string(r);
    if (bench_col) s.benchmark = trim(cell(*bench_col));
    for (std::size_t v = 0; v < schema.variables.size(); ++v) {
      const auto& var = schema.variables[v];
      auto value = parse_double(cell(var_cols[v]));
      if (!value || !std::isfinite(*value))
        throw Error(ErrorKind::kData, cell_ref(r, var.name) + ": unparseable value '" +
                                          cell(var_cols[v]) + "'");
      if (*value < var.min || *value > var.max)
        throw Error(ErrorKind::kData, cell_ref(r, var.name) + ": value " + trim(cell(var_cols[v])) +
                                          " outside [" + format_real(var.min) + ", " +
                                          format_real(var.max) + "]");
      if (var.kind == VariableKind::kInteger && std::floor(*value) != *value)
        throw Error(ErrorKind::kData, cell_ref(r, var.name) + ": expected an integer");
      s.values.push_back(*value);
    }
    if (schema.directives) {
      bool any = false;
      for (std::size_t d = 0; d < dir_cols.size(); ++d) {
        const auto& dir = schema.directives->directives[d];
        DirectiveSetting setting;
        std::size_t filled = 0;
        for (std::size_t o = 0; o < dir.options.size(); ++o) {
          const std::string raw = dir_cols[d][o] ? trim(cell(*dir_cols[d][o])) : std::string{};
          if (raw.empty()) continue;
          ++filled;
          const int ord = domain_ordinal(dir.options[o], raw);
          if (ord < 0)
            throw Error(ErrorKind::kData, cell_ref(r, directive_column(dir, dir.options[o])) +
                                              ": value '" + raw + "' not in domain");
          setting.push_back(ord);
        }
        if (filled != 0 && filled != dir.options.size())
          throw Error(ErrorKind::kData, "row " + std::to_string(r) + ": directive '" + dir.name +
                                            "' is partially specified");
        any = any || filled != 0;
        s.directives.push_back(filled ? std::move(setting) : DirectiveSetting{});
      }
      if (!any) s.directives.clear();
    }
    corpus.samples.push_back(std::move(s));
  }
  if (corpus.samples.empty()) throw Error(ErrorKind::kData, "empty corpus");
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path) {
  return parse_corpus(read_file(csv_path), load_schema(schema_path));
}

std::string format_corpus(const Corpus& corpus) {
  const auto& schema = corpus.schema;
  const bool with_bench = std::any_of(corpus.samples.begin(), corpus.samples.end(),
                                      [](const auto& s) { return !s.benchmark.empty(); });
  std::ostringstream out;
  out << "project_id";
  if (with_bench) out << ",benchmark";
  for (const auto& v : schema.variables) out << ',' << csv_escape(v.name);
  if (schema.directives) {
    for (const auto& d : schema.directives->directives)
      for (const auto& o : d.options) out << ',' << csv_escape(directive_column(d, o));
  }
  out << '\n';
  for (const auto& s : corpus.samples) {
    out << csv_escape(s.project_id);
    if (with_bench) out << ',' << csv_escape(s.benchmark);
    for (double v : s.values) out << ',' << format_real(v);
    if (schema.directives) {
      const auto& dirs = schema.directives->directives;
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        const bool set = d < s.directives.size() && !s.directives[d].empty();
        for (std::size_t o = 0; o < dirs[d].options.size(); ++o) {
          out << ',';
          if (set) out << csv_escape(dirs[d].options[o].domain.at(s.directives[d][o]));
        }
      }
    }
    out << '\n';
  }
  return out.str();
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + csv_path.string());
  out << format_corpus(corpus);
}

std::pair<Corpus, std::vector<std::string>> drop_constant_columns(const Corpus& corpus) {
  if (corpus.samples.empty()) throw Error(ErrorKind::kData, "empty corpus");
  std::vector<std::size_t> keep;
  std::vector<std::string> dropped;
  for (std::size_t c = 0; c < corpus.schema.variables.size(); ++c) {
    const double first = corpus.samples.front().values[c];
    const bool varies = std::any_of(corpus.samples.begin(), corpus.samples.end(),
                                    [&](const auto& s) { return s.values[c] != first; });
    if (varies) {
      keep.push_back(c);
    } else {
      dropped.push_back(corpus.schema.variables[c].name);
    }
  }
  if (keep.empty()) throw Error(ErrorKind::kData, "no varying variables");
  Corpus out;
  out.schema = corpus.schema;
  out.schema.variables.clear();
  for (auto c : keep) out.schema.variables.push_back(corpus.schema.variables[c]);
  out.samples.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) {
    HlsSample t = s;
    t.values.clear();
    for (auto c : keep) t.values.push_back(s.values[c]);
    out.samples.push_back(std::move(t));
  }
  return {std::move(out), std::move(dropped)};
}

std::string benchmark_of(const HlsSample& sample) {
  if (!sample.benchmark.empty()) return sample.benchmark;
  return sample.project_id.substr(0, sample.project_id.find('-'));
}

DirectiveSplit split_by_directives(const Corpus& corpus) {
  DirectiveSplit split;
  split.plain.schema = corpus.schema;
  split.plain.schema.directives.reset();

  // Applied-directive mask per benchmark; rows of one benchmark must agree.
  std::map<std::string, std::vector<bool>> masks;
  for (const auto& s : corpus.samples) {
    if (s.applied_directive_count() == 0) {
      HlsSample t = s;
      t.directives.clear();
      split.plain.samples.push_back(std::move(t));
      continue;
    }
    const std::string bench = benchmark_of(s);
    std::vector<bool> mask(s.directives.size());
    for (std::size_t d = 0; d < mask.size(); ++d) mask[d] = !s.directives[d].empty();
    auto [it, inserted] = masks.emplace(bench, mask);
    if (!inserted && it->second != mask) {
      const auto count = [](const std::vector<bool>& m) { return std::count(m.begin(), m.end(), true); };
      throw Error(ErrorKind::kData, "benchmark '" + bench + "': inconsistent directive count (" +
                                        std::to_string(count(it->second)) + " vs " +
                                        std::to_string(count(mask)) + ") in sample '" +
                                        s.project_id + "'");
    }
    auto& group = split.by_benchmark[bench];
    if (group.samples.empty()) {
      group.schema = corpus.schema;
      DirectiveSchema restricted;
      for (std::size_t d = 0; d < mask.size(); ++d)
        if (mask[d]) restricted.directives.push_back(corpus.schema.directives->directives[d]);
      group.schema.directives = std::move(restricted);
    }
    HlsSample t = s;
    t.directives.clear();
    for (std::size_t d = 0; d < mask.size(); ++d)
      if (mask[d]) t.directives.push_back(s.directives[d]);
    group.samples.push_back(std::move(t));
  }
  return split;
}

}  // namespace hlsforge
