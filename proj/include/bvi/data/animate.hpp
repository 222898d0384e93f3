#pragma once

#include <cmath>

#include "bvi/core/rng.hpp"
#include "bvi/core/tensor.hpp"

namespace bvi {

// Per-frame rigid jitter of the base mask. One delta triple is drawn per
// clip; frame t applies the t-fold accumulated transform to the base mask in
// a single nearest-neighbor resampling (no compounding resampling error).
struct MotionParams {
  double shift_max = 1.0;    // |dx|, |dy| per frame, pixels
  double rot_max = 0.015;    // |dtheta| per frame, radians
  double scale_max = 0.003;  // |ds| per frame, relative
};

namespace data {

// Renders base under (translate tx,ty; rotate theta; scale s about center).
inline Tensor warp_mask(const Tensor& base, double tx, double ty, double theta, double s) {
  long H = base.dim(0), W = base.dim(1);
  double cx = (W - 1) / 2.0, cy = (H - 1) / 2.0;
  double cos_t = std::cos(-theta), sin_t = std::sin(-theta);
  Tensor out({H, W});
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x) {
      double rx = (x - cx - tx), ry = (y - cy - ty);
      double sx = (cos_t * rx - sin_t * ry) / s + cx;
      double sy = (sin_t * rx + cos_t * ry) / s + cy;
      long ix = static_cast<long>(std::lround(sx));
      long iy = static_cast<long>(std::lround(sy));
      if (ix >= 0 && ix < W && iy >= 0 && iy < H && base[iy * W + ix] > 0.5) out[y * W + x] = 1.0;
    }
  return out;
}

// Centroid of the 1-pixels; falls back to the frame center for empty masks.
inline std::pair<double, double> mask_centroid(const Tensor& mask) {
  long H = mask.dim(0), W = mask.dim(1);
  double sx = 0.0, sy = 0.0, n = 0.0;
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x)
      if (mask[y * W + x] > 0.5) {
        sx += x;
        sy += y;
        n += 1.0;
      }
  if (n == 0.0) return {(W - 1) / 2.0, (H - 1) / 2.0};
  return {sx / n, sy / n};
}

}  // namespace data

// base: (H,W) binary. Returns (T,H,W,1) binary. If the accumulated
// translation would push the mask fully out of frame, it is re-clamped so the
// base centroid stays inside.
inline Tensor animate_mask(const Tensor& base, long T, const MotionParams& motion, Rng& rng) {
  if (base.ndim() != 2) throw DimensionError("animate_mask: base mask must be (H,W)");
  if (T < 1) throw ValidationError("animate_mask: T must be at least 1");
  long H = base.dim(0), W = base.dim(1);
  double dx = rng.uniform(-motion.shift_max, motion.shift_max);
  double dy = rng.uniform(-motion.shift_max, motion.shift_max);
  double dtheta = rng.uniform(-motion.rot_max, motion.rot_max);
  double dscale = rng.uniform(-motion.scale_max, motion.scale_max);
  auto [cx, cy] = data::mask_centroid(base);
  double ccx = cx - (W - 1) / 2.0, ccy = cy - (H - 1) / 2.0;

  Tensor out({T, H, W, 1});
  for (long t = 0; t < T; ++t) {
    double tx = t * dx, ty = t * dy;
    double theta = t * dtheta;
    double s = std::pow(1.0 + dscale, static_cast<double>(t));
    Tensor frame = data::warp_mask(base, tx, ty, theta, s);
    if (frame.sum() == 0.0 && base.sum() > 0.0) {
      // Keep the (transformed) centroid inside the frame.
      double cos_t = std::cos(theta), sin_t = std::sin(theta);
      double px = s * (cos_t * ccx - sin_t * ccy) + (W - 1) / 2.0;
      double py = s * (sin_t * ccx + cos_t * ccy) + (H - 1) / 2.0;
      tx = std::clamp(px + tx, 0.0, static_cast<double>(W - 1)) - px;
      ty = std::clamp(py + ty, 0.0, static_cast<double>(H - 1)) - py;
      frame = data::warp_mask(base, tx, ty, theta, s);
    }
    std::copy(frame.begin(), frame.end(), out.data() + t * H * W);
  }
  return out;
}

}  // namespace bvi
