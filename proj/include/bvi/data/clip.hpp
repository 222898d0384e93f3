#pragma once

#include <cstdint>
#include <string>

#include "bvi/core/tensor.hpp"

namespace bvi {

// One dataset record: corrupted clip X, ground truth Y, binary mask M
// (1 = corrupted), plus provenance. X equals Y outside the dilated blend
// band, and one seed fully determines the record.
struct ClipTriple {
  Tensor x;  // (T,H,W,3)
  Tensor y;  // (T,H,W,3)
  Tensor m;  // (T,H,W,1), values in {0,1}
  uint64_t seed = 0;
  double coverage = 0.0;
  std::string sources;
};

}  // namespace bvi
