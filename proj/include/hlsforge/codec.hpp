#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hlsforge/dataset.hpp"

namespace hlsforge {

// Unsigned binary fixed point, Q<integer_bits>.<fraction_bits>.
struct FixedPointFormat {
  int total_bits = 32;
  int integer_bits = 20;
  int fraction_bits = 12;

  void validate() const;
  double resolution() const;     // 2^-fraction_bits
  double max_value() const;      // 2^integer_bits - 2^-fraction_bits
  std::uint64_t max_code() const;
};

inline constexpr FixedPointFormat kQ20_12{};

// Bits of one value in a row, most significant bit first.
using BitRow = std::vector<std::uint8_t>;

// Round-to-nearest-even of v * 2^fraction_bits.
// Throws Error(kOverflow) for out-of-range v, Error(kInvalidArgument) for NaN/Inf.
std::uint64_t quantize(double v, const FixedPointFormat& fmt = kQ20_12);
double dequantize(std::uint64_t code, const FixedPointFormat& fmt = kQ20_12);

BitRow encode_value(double v, const FixedPointFormat& fmt = kQ20_12);
double decode_value(std::span<const std::uint8_t> row, const FixedPointFormat& fmt = kQ20_12);

// Unsigned integer of an MSB-first row.
std::uint64_t row_to_code(std::span<const std::uint8_t> row);
void code_to_row(std::uint64_t code, std::span<std::uint8_t> row);

// Option i occupies the i-th nibble from the top; unused low bits are zero.
BitRow encode_directive(std::span<const int> ordinals, const Directive& directive, int row_bits = 32);
// Name-based form: each option name maps to one of its domain values.
BitRow encode_directive(const std::vector<std::pair<std::string, std::string>>& settings,
                        const Directive& directive, int row_bits = 32);

struct BitMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> bits;  // row-major, one 0/1 per entry
  std::vector<std::string> row_labels;

  BitMatrix() = default;
  BitMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), bits(r * c, 0), row_labels(r) {}

  std::uint8_t at(std::size_t r, std::size_t c) const { return bits[r * cols + c]; }
  std::uint8_t& at(std::size_t r, std::size_t c) { return bits[r * cols + c]; }
  std::span<const std::uint8_t> row(std::size_t r) const { return {bits.data() + r * cols, cols}; }
  std::span<std::uint8_t> row(std::size_t r) { return {bits.data() + r * cols, cols}; }

  bool operator==(const BitMatrix&) const = default;
};

enum class DecodeMode { kLenient, kStrict };

struct DecodedSample {
  HlsSample sample;
  bool valid = true;  // false when a directive nibble was clamped
};

BitMatrix encode_sample(const HlsSample& sample, const Schema& schema,
                        const FixedPointFormat& fmt = kQ20_12);
DecodedSample decode_sample(const BitMatrix& m, const Schema& schema,
                            DecodeMode mode = DecodeMode::kLenient,
                            const FixedPointFormat& fmt = kQ20_12);

std::vector<BitMatrix> encode_corpus(const Corpus& corpus, const FixedPointFormat& fmt = kQ20_12);

// "HLSB" file: rows and cols as u32 LE, packed MSB-first bits, then a
// u32-length-prefixed block of '\n'-separated UTF-8 labels.
std::vector<std::uint8_t> serialize_bit_matrix(const BitMatrix& m);
BitMatrix deserialize_bit_matrix(std::span<const std::uint8_t> bytes);
void save_bit_matrix(const BitMatrix& m, const std::filesystem::path& path);
BitMatrix load_bit_matrix(const std::filesystem::path& path);

// A corpus is stored as one matrix of vertically stacked samples whose
// labels repeat with the per-sample row count.
BitMatrix stack(std::span<const BitMatrix> samples);
std::vector<BitMatrix> unstack(const BitMatrix& stacked);

}  // namespace hlsforge
