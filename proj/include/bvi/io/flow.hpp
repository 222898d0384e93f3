#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "bvi/core/tensor.hpp"

namespace bvi {
namespace io {

// Flow file: 16-byte header (magic "BVF1", then u32 LE T-1, H, W) followed by
// (T-1)*H*W*2 float32 LE displacements ordered (t, y, x, [dx, dy]).
inline constexpr char kFlowMagic[4] = {'B', 'V', 'F', '1'};

inline void write_flow(const std::string& path, const Tensor& flow) {
  if (flow.ndim() != 4 || flow.dim(3) != 2) throw DimensionError("write_flow: expected (T-1,H,W,2)");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IntegrityError("write_flow: cannot open " + path);
  f.write(kFlowMagic, 4);
  uint32_t dims[3] = {static_cast<uint32_t>(flow.dim(0)), static_cast<uint32_t>(flow.dim(1)),
                      static_cast<uint32_t>(flow.dim(2))};
  f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (long i = 0; i < flow.size(); ++i) {
    float v = static_cast<float>(flow[i]);
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  if (!f) throw IntegrityError("write_flow: short write on " + path);
}

inline Tensor read_flow(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IntegrityError("read_flow: cannot open " + path);
  char magic[4];
  uint32_t dims[3];
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!f || std::memcmp(magic, kFlowMagic, 4) != 0) throw IntegrityError("read_flow: bad header in " + path);
  Tensor flow({static_cast<long>(dims[0]), static_cast<long>(dims[1]), static_cast<long>(dims[2]), 2});
  for (long i = 0; i < flow.size(); ++i) {
    float v;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    flow[i] = static_cast<double>(v);
  }
  if (!f) throw IntegrityError("read_flow: truncated payload in " + path);
  if (!flow.all_finite()) throw ValidationError("read_flow: non-finite flow in " + path);
  return flow;
}

}  // namespace io
}  // namespace bvi
