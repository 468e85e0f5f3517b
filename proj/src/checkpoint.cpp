#include "hlsforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hlsforge/error.hpp"

namespace hlsforge::nn {
namespace {

constexpr char kMagic[4] = {'H', 'L', 'S', 'C'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorKind::kData, "truncated checkpoint");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[pos + i]) << (8 * i);
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.descriptor.size()));
  out.insert(out.end(), ckpt.descriptor.begin(), ckpt.descriptor.end());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorKind::kData, "not a checkpoint file (bad magic)");
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion)
    throw Error(ErrorKind::kData, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  const auto len = get_le<std::uint32_t>(bytes, pos);
  if (pos + len > bytes.size()) throw Error(ErrorKind::kData, "truncated checkpoint");
  ckpt.descriptor.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
  pos += len;
  const auto count = get_le<std::uint32_t>(bytes, pos);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rank = get_le<std::uint32_t>(bytes, pos);
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(get_le<std::uint64_t>(bytes, pos));
    Tensor t(shape);
    for (auto& v : t.values()) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
    ckpt.tensors.push_back(std::move(t));
  }
  if (pos != bytes.size()) throw Error(ErrorKind::kData, "trailing bytes in checkpoint");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

void restore_tensors(const std::vector<Tensor>& source, const std::vector<Tensor*>& targets) {
  if (source.size() != targets.size())
    throw Error(ErrorKind::kData, "checkpoint holds " + std::to_string(source.size()) +
                                      " tensors, model expects " + std::to_string(targets.size()));
  for (std::size_t i = 0; i < source.size(); ++i) {
    require_shape(source[i], targets[i]->shape(), "checkpoint tensor");
    *targets[i] = source[i];
  }
}

}  // namespace hlsforge::nn
