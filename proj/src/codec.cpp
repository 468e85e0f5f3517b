#include "hlsforge/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "hlsforge/error.hpp"

namespace hlsforge {
namespace {

constexpr int kNibbleBits = 4;
constexpr char kMagic[4] = {'H', 'L', 'S', 'B'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + 4 > bytes.size()) throw Error(ErrorKind::kData, "truncated bit matrix file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace

void FixedPointFormat::validate() const {
  if (integer_bits <= 0 || fraction_bits <= 0 || total_bits <= 0)
    throw Error(ErrorKind::kInvalidArgument, "fixed-point bit counts must be positive");
  if (integer_bits + fraction_bits != total_bits)
    throw Error(ErrorKind::kInvalidArgument, "integer_bits + fraction_bits must equal total_bits");
  if (total_bits > 52)
    throw Error(ErrorKind::kInvalidArgument, "fixed-point formats wider than 52 bits are not supported");
}

double FixedPointFormat::resolution() const { return std::ldexp(1.0, -fraction_bits); }

double FixedPointFormat::max_value() const {
  return std::ldexp(1.0, integer_bits) - resolution();
}

std::uint64_t FixedPointFormat::max_code() const {
  return (std::uint64_t{1} << total_bits) - 1;
}

std::uint64_t quantize(double v, const FixedPointFormat& fmt) {
  fmt.validate();
  if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidArgument, "cannot encode a non-finite value");
  if (v < 0.0 || v > fmt.max_value())
    throw Error(ErrorKind::kOverflow, "value " + format_real(v) + " outside fixed-point range [0, " +
                                          format_real(fmt.max_value()) + "]");
  // Scaling by a power of two is exact; nearbyint rounds half to even under
  // the default rounding mode.
  const double scaled = std::ldexp(v, fmt.fraction_bits);
  return static_cast<std::uint64_t>(std::nearbyint(scaled));
}

double dequantize(std::uint64_t code, const FixedPointFormat& fmt) {
  return std::ldexp(static_cast<double>(code), -fmt.fraction_bits);
}

std::uint64_t row_to_code(std::span<const std::uint8_t> row) {
  std::uint64_t code = 0;
  for (auto b : row) code = (code << 1) | (b & 1u);
  return code;
}

void code_to_row(std::uint64_t code, std::span<std::uint8_t> row) {
  const std::size_t n = row.size();
  for (std::size_t j = 0; j < n; ++j) row[j] = static_cast<std::uint8_t>((code >> (n - 1 - j)) & 1u);
}

BitRow encode_value(double v, const FixedPointFormat& fmt) {
  BitRow row(static_cast<std::size_t>(fmt.total_bits));
  code_to_row(quantize(v, fmt), row);
  return row;
}

double decode_value(std::span<const std::uint8_t> row, const FixedPointFormat& fmt) {
  if (row.size() != static_cast<std::size_t>(fmt.total_bits))
    throw Error(ErrorKind::kShape, "row length does not match the fixed-point format");
  return dequantize(row_to_code(row), fmt);
}

BitRow encode_directive(std::span<const int> ordinals, const Directive& directive, int row_bits) {
  if (ordinals.size() != directive.options.size())
    throw Error(ErrorKind::kInvalidArgument,
                "directive '" + directive.name + "': expected " +
                    std::to_string(directive.options.size()) + " option values");
  if (static_cast<int>(ordinals.size()) * kNibbleBits > row_bits)
    throw Error(ErrorKind::kSchema, "directive '" + directive.name + "' does not fit in one row");
  BitRow row(static_cast<std::size_t>(row_bits), 0);
  for (std::size_t i = 0; i < ordinals.size(); ++i) {
    const int ord = ordinals[i];
    if (ord < 0 || static_cast<std::size_t>(ord) >= directive.options[i].domain.size())
      throw Error(ErrorKind::kData, "directive '" + directive.name + "' option '" +
                                        directive.options[i].name + "': value not in domain");
    code_to_row(static_cast<std::uint64_t>(ord), std::span(row).subspan(i * kNibbleBits, kNibbleBits));
  }
  return row;
}

BitRow encode_directive(const std::vector<std::pair<std::string, std::string>>& settings,
                        const Directive& directive, int row_bits) {
  std::vector<int> ordinals(directive.options.size(), -1);
  for (const auto& [option, value] : settings) {
    auto it = std::find_if(directive.options.begin(), directive.options.end(),
                           [&](const auto& o) { return o.name == option; });
    if (it == directive.options.end())
      throw Error(ErrorKind::kInvalidArgument,
                  "directive '" + directive.name + "': unknown option '" + option + "'");
    auto pos = std::find(it->domain.begin(), it->domain.end(), value);
    if (pos == it->domain.end())
      throw Error(ErrorKind::kData, "directive '" + directive.name + "' option '" + option +
                                        "': value '" + value + "' not in domain");
    ordinals[static_cast<std::size_t>(it - directive.options.begin())] =
        static_cast<int>(pos - it->domain.begin());
  }
  for (std::size_t i = 0; i < ordinals.size(); ++i) {
    if (ordinals[i] < 0)
      throw Error(ErrorKind::kInvalidArgument, "directive '" + directive.name + "': option '" +
                                                   directive.options[i].name + "' missing");
  }
  return encode_directive(ordinals, directive, row_bits);
}

BitMatrix encode_sample(const HlsSample& sample, const Schema& schema, const FixedPointFormat& fmt) {
  fmt.validate();
  const std::size_t nvar = schema.variables.size();
  const std::size_t ndir = schema.directive_count();
  if (sample.values.size() != nvar)
    throw Error(ErrorKind::kShape, "sample '" + sample.project_id + "' has wrong variable count");
  if (ndir > 0 && sample.directives.size() != ndir)
    throw Error(ErrorKind::kData, "sample '" + sample.project_id +
                                      "' does not set every directive of the schema");
  const auto cols = static_cast<std::size_t>(fmt.total_bits);
  BitMatrix m(nvar + ndir, cols);
  for (std::size_t v = 0; v < nvar; ++v) {
    code_to_row(quantize(sample.values[v], fmt), m.row(v));
    m.row_labels[v] = schema.variables[v].name;
  }
  for (std::size_t d = 0; d < ndir; ++d) {
    const auto& dir = schema.directives->directives[d];
    if (sample.directives[d].empty())
      throw Error(ErrorKind::kData, "sample '" + sample.project_id + "' does not apply directive '" +
                                        dir.name + "'");
    const BitRow row = encode_directive(sample.directives[d], dir, fmt.total_bits);
    std::copy(row.begin(), row.end(), m.row(nvar + d).begin());
    m.row_labels[nvar + d] = dir.name;
  }
  return m;
}

DecodedSample decode_sample(const BitMatrix& m, const Schema& schema, DecodeMode mode,
                            const FixedPointFormat& fmt) {
  const std::size_t nvar = schema.variables.size();
  const std::size_t ndir = schema.directive_count();
  if (m.rows != nvar + ndir || m.cols != static_cast<std::size_t>(fmt.total_bits))
    throw Error(ErrorKind::kShape, "bit matrix shape does not match the schema");
  DecodedSample out;
  auto& s = out.sample;
  for (std::size_t v = 0; v < nvar; ++v) {
    const auto& var = schema.variables[v];
    double x = dequantize(row_to_code(m.row(v)), fmt);
    if (var.kind == VariableKind::kInteger) x = std::nearbyint(x);
    if (x < var.min || x > var.max) {
      if (mode == DecodeMode::kStrict)
        throw Error(ErrorKind::kData, "decoded '" + var.name + "' = " + format_real(x) +
                                          " outside the schema range");
      x = std::clamp(x, var.min, var.max);
      out.valid = false;
    }
    s.values.push_back(x);
  }
  for (std::size_t d = 0; d < ndir; ++d) {
    const auto& dir = schema.directives->directives[d];
    const auto row = m.row(nvar + d);
    DirectiveSetting setting;
    for (std::size_t o = 0; o < dir.options.size(); ++o) {
      const auto ord = static_cast<int>(row_to_code(row.subspan(o * kNibbleBits, kNibbleBits)));
      const int size = static_cast<int>(dir.options[o].domain.size());
      if (ord >= size) {
        if (mode == DecodeMode::kStrict)
          throw Error(ErrorKind::kData, "directive '" + dir.name + "' option '" +
                                            dir.options[o].name + "': code " + std::to_string(ord) +
                                            " outside domain of size " + std::to_string(size));
        setting.push_back(size - 1);
        out.valid = false;
      } else {
        setting.push_back(ord);
      }
    }
    s.directives.push_back(std::move(setting));
  }
  return out;
}

std::vector<BitMatrix> encode_corpus(const Corpus& corpus, const FixedPointFormat& fmt) {
  std::vector<BitMatrix> out;
  out.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) out.push_back(encode_sample(s, corpus.schema, fmt));
  return out;
}

std::vector<std::uint8_t> serialize_bit_matrix(const BitMatrix& m) {
  if (m.bits.size() != m.rows * m.cols || m.row_labels.size() != m.rows)
    throw Error(ErrorKind::kShape, "inconsistent bit matrix");
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(m.rows));
  put_u32(out, static_cast<std::uint32_t>(m.cols));
  const std::size_t nbits = m.rows * m.cols;
  const std::size_t base = out.size();
  out.resize(base + (nbits + 7) / 8, 0);
  for (std::size_t i = 0; i < nbits; ++i) {
    if (m.bits[i]) out[base + i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  std::string labels;
  for (std::size_t r = 0; r < m.row_labels.size(); ++r) {
    if (r) labels.push_back('\n');
    labels += m.row_labels[r];
  }
  put_u32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

BitMatrix deserialize_bit_matrix(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw Error(ErrorKind::kData, "not a bit matrix file (bad magic)");
  std::size_t pos = 4;
  const std::size_t rows = get_u32(bytes, pos);
  const std::size_t cols = get_u32(bytes, pos);
  BitMatrix m(rows, cols);
  const std::size_t nbits = rows * cols;
  const std::size_t nbytes = (nbits + 7) / 8;
  if (pos + nbytes > bytes.size()) throw Error(ErrorKind::kData, "truncated bit matrix file");
  for (std::size_t i = 0; i < nbits; ++i) m.bits[i] = (bytes[pos + i / 8] >> (7 - i % 8)) & 1u;
  pos += nbytes;
  const std::size_t len = get_u32(bytes, pos);
  if (pos + len != bytes.size()) throw Error(ErrorKind::kData, "bad label block length");
  const std::string labels(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  m.row_labels.clear();
  if (rows > 0) {
    std::size_t start = 0;
    while (true) {
      const auto nl = labels.find('\n', start);
      m.row_labels.push_back(labels.substr(start, nl - start));
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
  }
  if (m.row_labels.size() != rows) throw Error(ErrorKind::kData, "label count does not match rows");
  return m;
}

void save_bit_matrix(const BitMatrix& m, const std::filesystem::path& path) {
  const auto bytes = serialize_bit_matrix(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

BitMatrix load_bit_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_bit_matrix(bytes);
}

BitMatrix stack(std::span<const BitMatrix> samples) {
  if (samples.empty()) return {};
  const auto& first = samples.front();
  BitMatrix out(first.rows * samples.size(), first.cols);
  out.row_labels.clear();
  std::size_t offset = 0;
  for (const auto& m : samples) {
    if (m.rows != first.rows || m.cols != first.cols)
      throw Error(ErrorKind::kShape, "cannot stack bit matrices of different shapes");
    std::copy(m.bits.begin(), m.bits.end(), out.bits.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += m.bits.size();
    out.row_labels.insert(out.row_labels.end(), m.row_labels.begin(), m.row_labels.end());
  }
  return out;
}

std::vector<BitMatrix> unstack(const BitMatrix& stacked) {
  if (stacked.rows == 0) return {};
  // Labels are unique within a sample, so the period is the first repeat.
  std::size_t period = stacked.rows;
  for (std::size_t r = 1; r < stacked.rows; ++r) {
    if (stacked.row_labels[r] == stacked.row_labels[0]) {
      period = r;
      break;
    }
  }
  if (stacked.rows % period != 0) throw Error(ErrorKind::kData, "stacked matrix has a ragged last sample");
  std::vector<BitMatrix> out;
  for (std::size_t start = 0; start < stacked.rows; start += period) {
    BitMatrix m(period, stacked.cols);
    std::copy_n(stacked.bits.begin() + static_cast<std::ptrdiff_t>(start * stacked.cols),
                period * stacked.cols, m.bits.begin());
    std::copy_n(stacked.row_labels.begin() + static_cast<std::ptrdiff_t>(start), period,
                m.row_labels.begin());
    for (std::size_t r = 0; r < period; ++r) {
      if (m.row_labels[r] != stacked.row_labels[r])
        throw Error(ErrorKind::kData, "stacked matrix labels are not periodic");
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace hlsforge
