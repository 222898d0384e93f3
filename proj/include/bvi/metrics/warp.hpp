#pragma once

#include <cmath>

#include "bvi/core/tensor.hpp"

namespace bvi {
namespace metrics {

struct WarpErrorResult {
  double value = 0.0;
  long skipped_pairs = 0;  // frame pairs with no usable pixel
};

// Flow-warping temporal error. flow[t] holds per-pixel (dx, dy) displacements
// from frame t to frame t+1, so frame t is backward-warped by sampling at
// p - flow(p) and compared against frame t+1. Pixels whose source sample
// falls outside the frame, and occluded pixels, are excluded; a pair with no
// usable pixels is skipped and counted.
inline WarpErrorResult warping_error(const Tensor& clip, const Tensor& flow, const Tensor& occlusion = Tensor()) {
  if (clip.ndim() != 4) throw DimensionError("warping_error: clip must be (T,H,W,C)");
  long T = clip.dim(0), H = clip.dim(1), W = clip.dim(2), C = clip.dim(3);
  if (flow.ndim() != 4 || flow.dim(0) != T - 1 || flow.dim(1) != H || flow.dim(2) != W || flow.dim(3) != 2)
    throw DimensionError("warping_error: flow must be (T-1,H,W,2)");
  bool has_occ = !occlusion.empty();
  if (has_occ && (occlusion.ndim() != 4 || occlusion.dim(0) != T - 1 || occlusion.dim(1) != H ||
                  occlusion.dim(2) != W || occlusion.dim(3) != 1))
    throw DimensionError("warping_error: occlusion mask misaligned");
  if (!flow.all_finite()) throw ValidationError("warping_error: non-finite flow");

  WarpErrorResult res;
  double total = 0.0;
  long pairs = 0;
  for (long t = 0; t + 1 < T; ++t) {
    double acc = 0.0;
    long n = 0;
    for (long y = 0; y < H; ++y)
      for (long x = 0; x < W; ++x) {
        long p = (t * H + y) * W + x;
        if (has_occ && occlusion[p] > 0.5) continue;
        double sx = x - flow[p * 2 + 0];
        double sy = y - flow[p * 2 + 1];
        if (sx < 0.0 || sy < 0.0 || sx > W - 1 || sy > H - 1) continue;
        long x0 = static_cast<long>(std::floor(sx)), y0 = static_cast<long>(std::floor(sy));
        long x1 = std::min(x0 + 1, W - 1), y1 = std::min(y0 + 1, H - 1);
        double fx = sx - x0, fy = sy - y0;
        double diff = 0.0;
        for (long c = 0; c < C; ++c) {
          double v00 = clip.at(t, y0, x0, c), v01 = clip.at(t, y0, x1, c);
          double v10 = clip.at(t, y1, x0, c), v11 = clip.at(t, y1, x1, c);
          double warped = (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
          diff += std::fabs(clip.at(t + 1, y, x, c) - warped);
        }
        acc += diff / static_cast<double>(C);
        ++n;
      }
    if (n == 0) {
      ++res.skipped_pairs;
      continue;
    }
    total += acc / static_cast<double>(n);
    ++pairs;
  }
  res.value = pairs ? total / static_cast<double>(pairs) : 0.0;
  return res;
}

}  // namespace metrics
}  // namespace bvi
