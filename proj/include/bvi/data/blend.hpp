#pragma once

#include <cmath>
#include <vector>

#include "bvi/core/tensor.hpp"

namespace bvi {

// Boundary treatment of the raw composite: `iterations` rounds of Gaussian
// smoothing applied only inside the band of pixels within `band` of the mask
// boundary. Pixels outside the band are never written.
struct SmoothingParams {
  long iterations = 3;
  double sigma = 1.5;
  long band = 4;

  void validate() const {
    if (iterations < 1) throw ConfigError("SmoothingParams: iterations must be >= 1");
    if (sigma <= 0.0) throw ConfigError("SmoothingParams: sigma must be positive");
    if (band < 0) throw ConfigError("SmoothingParams: band must be nonnegative");
  }
};

namespace data {

// Euclidean-disk dilation of a binary (H,W) mask.
inline Tensor dilate(const Tensor& mask, long radius) {
  if (mask.ndim() != 2) throw DimensionError("dilate: expected (H,W)");
  if (radius <= 0) return mask.clone();
  long H = mask.dim(0), W = mask.dim(1);
  std::vector<std::pair<long, long>> disk;
  for (long dy = -radius; dy <= radius; ++dy)
    for (long dx = -radius; dx <= radius; ++dx)
      if (dy * dy + dx * dx <= radius * radius) disk.emplace_back(dy, dx);
  Tensor out({H, W});
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x) {
      if (mask[y * W + x] <= 0.5) continue;
      for (auto [dy, dx] : disk) {
        long ny = y + dy, nx = x + dx;
        if (ny >= 0 && ny < H && nx >= 0 && nx < W) out[ny * W + nx] = 1.0;
      }
    }
  return out;
}

// (T,H,W,1) variant, frame by frame.
inline Tensor dilate_sequence(const Tensor& masks, long radius) {
  if (masks.ndim() != 4 || masks.dim(3) != 1) throw DimensionError("dilate_sequence: expected (T,H,W,1)");
  long T = masks.dim(0), H = masks.dim(1), W = masks.dim(2);
  Tensor out(masks.shape());
  Tensor frame({H, W});
  for (long t = 0; t < T; ++t) {
    std::copy(masks.data() + t * H * W, masks.data() + (t + 1) * H * W, frame.data());
    Tensor d = dilate(frame, radius);
    std::copy(d.begin(), d.end(), out.data() + t * H * W);
  }
  return out;
}

// Separable Gaussian blur with replicated borders; img is (H,W,C).
inline Tensor gaussian_blur(const Tensor& img, double sigma) {
  long H = img.dim(0), W = img.dim(1), C = img.dim(2);
  long radius = std::max<long>(1, static_cast<long>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    kernel[static_cast<size_t>(i + radius)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[static_cast<size_t>(i + radius)];
  }
  for (double& k : kernel) k /= sum;

  Tensor tmp({H, W, C}), out({H, W, C});
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x)
      for (long c = 0; c < C; ++c) {
        double acc = 0.0;
        for (long i = -radius; i <= radius; ++i) {
          long xx = std::clamp(x + i, 0L, W - 1);
          acc += kernel[static_cast<size_t>(i + radius)] * img[(y * W + xx) * C + c];
        }
        tmp[(y * W + x) * C + c] = acc;
      }
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x)
      for (long c = 0; c < C; ++c) {
        double acc = 0.0;
        for (long i = -radius; i <= radius; ++i) {
          long yy = std::clamp(y + i, 0L, H - 1);
          acc += kernel[static_cast<size_t>(i + radius)] * tmp[(yy * W + x) * C + c];
        }
        out[(y * W + x) * C + c] = acc;
      }
  return out;
}

// Mean gradient magnitude (central differences, channel mean) over the mask
// boundary pixels; the statistic the smoothing is meant to reduce.
inline double boundary_gradient(const Tensor& img, const Tensor& mask) {
  long H = img.dim(0), W = img.dim(1), C = img.dim(2);
  double acc = 0.0;
  long count = 0;
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x) {
      bool self = mask[y * W + x] > 0.5;
      bool boundary = false;
      if (y > 0 && (mask[(y - 1) * W + x] > 0.5) != self) boundary = true;
      if (y + 1 < H && (mask[(y + 1) * W + x] > 0.5) != self) boundary = true;
      if (x > 0 && (mask[y * W + x - 1] > 0.5) != self) boundary = true;
      if (x + 1 < W && (mask[y * W + x + 1] > 0.5) != self) boundary = true;
      if (!boundary) continue;
      double gx = 0.0, gy = 0.0;
      for (long c = 0; c < C; ++c) {
        long xm = std::max<long>(x - 1, 0), xp = std::min<long>(x + 1, W - 1);
        long ym = std::max<long>(y - 1, 0), yp = std::min<long>(y + 1, H - 1);
        gx += (img[(y * W + xp) * C + c] - img[(y * W + xm) * C + c]) / 2.0;
        gy += (img[(yp * W + x) * C + c] - img[(ym * W + x) * C + c]) / 2.0;
      }
      gx /= static_cast<double>(C);
      gy /= static_cast<double>(C);
      acc += std::sqrt(gx * gx + gy * gy);
      ++count;
    }
  return count ? acc / static_cast<double>(count) : 0.0;
}

}  // namespace data

// Raw composite x = (1-m) y + m u, then band-limited iterative smoothing.
// y, u: (H,W,3); m: (H,W). m == 0 returns y bit-exactly; m == 1 with band 0
// returns u bit-exactly.
inline Tensor blend_fill(const Tensor& y, const Tensor& m, const Tensor& u, const SmoothingParams& s) {
  s.validate();
  if (y.ndim() != 3 || !y.same_shape(u)) throw DimensionError("blend_fill: y and u must be (H,W,C) alike");
  if (m.ndim() != 2 || m.dim(0) != y.dim(0) || m.dim(1) != y.dim(1))
    throw DimensionError("blend_fill: mask misaligned");
  long H = y.dim(0), W = y.dim(1), C = y.dim(2);
  Tensor x({H, W, C});
  for (long p = 0; p < H * W; ++p) {
    double mv = m[p];
    for (long c = 0; c < C; ++c) x[p * C + c] = (1.0 - mv) * y[p * C + c] + mv * u[p * C + c];
  }
  if (s.band <= 0) return x;
  Tensor inv({H, W});
  for (long p = 0; p < H * W; ++p) inv[p] = m[p] > 0.5 ? 0.0 : 1.0;
  Tensor band_in = data::dilate(m, s.band);
  Tensor band_out = data::dilate(inv, s.band);
  std::vector<uint8_t> band(static_cast<size_t>(H * W));
  bool any = false;
  for (long p = 0; p < H * W; ++p) {
    band[static_cast<size_t>(p)] = band_in[p] > 0.5 && band_out[p] > 0.5;
    any |= band[static_cast<size_t>(p)] != 0;
  }
  if (!any) return x;
  for (long it = 0; it < s.iterations; ++it) {
    Tensor g = data::gaussian_blur(x, s.sigma);
    for (long p = 0; p < H * W; ++p)
      if (band[static_cast<size_t>(p)])
        for (long c = 0; c < C; ++c) x[p * C + c] = g[p * C + c];
  }
  return x;
}

}  // namespace bvi
