#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bvi/nn/params.hpp"

namespace bvi {
namespace io {

// Checkpoint layout (all integers little-endian):
//   magic "BVCK" | u32 version | u32 config_len | config bytes
//   u64 step | u32 rng_len | rng bytes
//   u32 n_tensors | per tensor: u32 name_len, name, u32 ndim, u64 dims[],
//                               f32 payload
//   trailing magic "KCVB"
// Payloads are float32; parameters are kept float32-representable during
// training, so save/load round-trips every tensor bit-exactly.
inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  uint32_t version = kCheckpointVersion;
  std::string config_text;
  uint64_t step = 0;
  std::string rng_state;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

namespace detail {

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& f, const std::string& path) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!f) throw IntegrityError("checkpoint: truncated file: " + path);
  return v;
}

inline std::string get_str(std::ifstream& f, uint32_t len, const std::string& path) {
  std::string s(len, '\0');
  f.read(s.data(), len);
  if (!f) throw IntegrityError("checkpoint: truncated file: " + path);
  return s;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IntegrityError("checkpoint: cannot open for write: " + path);
  f.write("BVCK", 4);
  detail::put(f, kCheckpointVersion);
  detail::put(f, static_cast<uint32_t>(ck.config_text.size()));
  f.write(ck.config_text.data(), static_cast<std::streamsize>(ck.config_text.size()));
  detail::put(f, ck.step);
  detail::put(f, static_cast<uint32_t>(ck.rng_state.size()));
  f.write(ck.rng_state.data(), static_cast<std::streamsize>(ck.rng_state.size()));
  detail::put(f, static_cast<uint32_t>(ck.tensors.size()));
  for (const auto& [name, t] : ck.tensors) {
    detail::put(f, static_cast<uint32_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put(f, static_cast<uint32_t>(t.ndim()));
    for (int d = 0; d < t.ndim(); ++d) detail::put(f, static_cast<uint64_t>(t.dim(d)));
    for (long i = 0; i < t.size(); ++i) detail::put(f, static_cast<float>(t[i]));
  }
  f.write("KCVB", 4);
  if (!f) throw IntegrityError("checkpoint: short write: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IntegrityError("checkpoint: cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "BVCK", 4) != 0) throw IntegrityError("checkpoint: bad magic: " + path);
  Checkpoint ck;
  ck.version = detail::get<uint32_t>(f, path);
  if (ck.version != kCheckpointVersion)
    throw UnsupportedVersionError("checkpoint: unsupported version " + std::to_string(ck.version) + " in " + path);
  ck.config_text = detail::get_str(f, detail::get<uint32_t>(f, path), path);
  ck.step = detail::get<uint64_t>(f, path);
  ck.rng_state = detail::get_str(f, detail::get<uint32_t>(f, path), path);
  uint32_t n = detail::get<uint32_t>(f, path);
  ck.tensors.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t name_len = detail::get<uint32_t>(f, path);
    std::string name = detail::get_str(f, name_len, path);
    uint32_t ndim = detail::get<uint32_t>(f, path);
    std::vector<long> shape;
    for (uint32_t d = 0; d < ndim; ++d) shape.push_back(static_cast<long>(detail::get<uint64_t>(f, path)));
    Tensor t(shape);
    for (long j = 0; j < t.size(); ++j) t[j] = static_cast<double>(detail::get<float>(f, path));
    ck.tensors.emplace_back(std::move(name), std::move(t));
  }
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "KCVB", 4) != 0) throw IntegrityError("checkpoint: missing trailer: " + path);
  return ck;
}

// Replaces the ParamSet contents with the checkpoint tensors.
inline void restore_params(ParamSet& params, const Checkpoint& ck, const std::string& prefix = "",
                           const std::string& exclude_prefix = "\x01") {
  for (const auto& [name, t] : ck.tensors) {
    if (!prefix.empty() && name.rfind(prefix, 0) != 0) continue;
    if (name.rfind(exclude_prefix, 0) == 0) continue;
    params.set(name.substr(prefix.size()), t.clone());
  }
}

}  // namespace io
}  // namespace bvi
