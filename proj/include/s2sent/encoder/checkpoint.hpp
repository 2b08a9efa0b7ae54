#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2sent/numerics/parameters.hpp"

// Checkpoint layout, all integers and floats little-endian:
//   "S2S1"                       4 magic bytes
//   u64 tensor_count
//   per tensor: u64 rank, then rank x u64 dims
//   float64 payload of every tensor, in table order, row-major
namespace s2sent::encoder {

inline constexpr char kCheckpointMagic[4] = {'S', '2', 'S', '1'};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw CheckpointError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& os, const ParameterList& params) {
  os.write(kCheckpointMagic, 4);
  detail::put_u64(os, params.size());
  for (const Tensor& t : params.tensors()) {
    detail::put_u64(os, t.rank());
    for (std::size_t d : t.shape()) detail::put_u64(os, d);
  }
  for (const Tensor& t : params.tensors()) {
    for (double v : t.data()) detail::put_u64(os, std::bit_cast<std::uint64_t>(v));
  }
}

/// Reads a checkpoint into `params`, whose tensor shapes must match the
/// stored shape table exactly.
inline void read_checkpoint(std::istream& is, ParameterList& params) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw CheckpointError("not an S2S1 checkpoint");
  }
  const std::uint64_t count = detail::get_u64(is);
  if (count != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(count) + " tensors, model has " +
                          std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t rank = detail::get_u64(is);
    if (rank > 8) throw CheckpointError("implausible tensor rank in checkpoint");
    Shape shape(rank);
    for (auto& d : shape) d = detail::get_u64(is);
    if (shape != params[i].shape()) {
      throw CheckpointError("tensor " + params.name(i) + ": checkpoint shape " + shape_string(shape) +
                            " vs model " + shape_string(params[i].shape()));
    }
  }
  for (Tensor& t : params.tensors()) {
    for (double& v : t.data()) v = std::bit_cast<double>(detail::get_u64(is));
  }
}

inline void save_checkpoint(const std::filesystem::path& path, const ParameterList& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot write checkpoint " + path.string());
  write_checkpoint(os, params);
  if (!os) throw CheckpointError("failed writing checkpoint " + path.string());
}

inline void load_checkpoint(const std::filesystem::path& path, ParameterList& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path.string());
  read_checkpoint(is, params);
}

}  // namespace s2sent::encoder
