#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hlsforge/tensor.hpp"

namespace hlsforge::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Checkpoint layout: "HLSC", u32 version, u32-length-prefixed architecture
// descriptor (JSON text), u32 tensor count, then per tensor u32 rank,
// u64 dims and the data as 64-bit little-endian reals.
struct Checkpoint {
  std::string descriptor;
  std::vector<Tensor> tensors;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies loaded tensors into live ones, checking shapes in order.
void restore_tensors(const std::vector<Tensor>& source, const std::vector<Tensor*>& targets);

}  // namespace hlsforge::nn
