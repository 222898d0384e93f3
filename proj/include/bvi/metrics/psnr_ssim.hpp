#pragma once

#include <cmath>

#include "bvi/core/tensor.hpp"

namespace bvi {
namespace metrics {

inline constexpr double kPsnrCap = 99.0;  // stands in for +inf at zero MSE

// Mean over frames of 10*log10(1/MSE_frame), values on the [0,1] scale. An
// optional region mask (T,H,W,1) restricts the MSE to selected pixels; a
// frame with an empty region is an error.
inline double psnr(const Tensor& a, const Tensor& b, const Tensor& region = Tensor()) {
  if (a.ndim() != 4 || !a.same_shape(b)) throw DimensionError("psnr: clips must be (T,H,W,C) alike");
  bool masked = !region.empty();
  if (masked && (region.ndim() != 4 || region.dim(3) != 1 || region.dim(0) != a.dim(0) ||
                 region.dim(1) != a.dim(1) || region.dim(2) != a.dim(2)))
    throw DimensionError("psnr: region mask misaligned");
  long T = a.dim(0), H = a.dim(1), W = a.dim(2), C = a.dim(3);
  double acc = 0.0;
  for (long t = 0; t < T; ++t) {
    double se = 0.0;
    long n = 0;
    for (long p = t * H * W; p < (t + 1) * H * W; ++p) {
      if (masked && region[p] <= 0.5) continue;
      for (long c = 0; c < C; ++c) {
        double d = a[p * C + c] - b[p * C + c];
        se += d * d;
      }
      n += C;
    }
    if (n == 0) throw ValidationError("psnr: empty region in frame " + std::to_string(t));
    double mse = se / static_cast<double>(n);
    acc += mse <= 0.0 ? kPsnrCap : std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
  }
  return acc / static_cast<double>(T);
}

namespace detail {

inline std::vector<double> ssim_window(long radius, double sigma) {
  std::vector<double> k(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    k[static_cast<size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<size_t>(i + radius)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian filter of an (H,W) plane, evaluated everywhere; callers
// read only the valid interior.
inline std::vector<double> filter_plane(const std::vector<double>& img, long H, long W,
                                        const std::vector<double>& k) {
  long radius = (static_cast<long>(k.size()) - 1) / 2;
  std::vector<double> tmp(static_cast<size_t>(H * W), 0.0), out(static_cast<size_t>(H * W), 0.0);
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x) {
      double acc = 0.0;
      for (long i = -radius; i <= radius; ++i) {
        long xx = std::clamp(x + i, 0L, W - 1);
        acc += k[static_cast<size_t>(i + radius)] * img[static_cast<size_t>(y * W + xx)];
      }
      tmp[static_cast<size_t>(y * W + x)] = acc;
    }
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x) {
      double acc = 0.0;
      for (long i = -radius; i <= radius; ++i) {
        long yy = std::clamp(y + i, 0L, H - 1);
        acc += k[static_cast<size_t>(i + radius)] * tmp[static_cast<size_t>(yy * W + x)];
      }
      out[static_cast<size_t>(y * W + x)] = acc;
    }
  return out;
}

}  // namespace detail

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
// C2 = 0.03^2 on the [0,1] range, averaged over the valid interior, channels
// and frames.
inline double ssim(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 4 || !a.same_shape(b)) throw DimensionError("ssim: clips must be (T,H,W,C) alike");
  long T = a.dim(0), H = a.dim(1), W = a.dim(2), C = a.dim(3);
  const long radius = 5;
  if (H < 2 * radius + 1 || W < 2 * radius + 1) throw DimensionError("ssim: frames smaller than the 11x11 window");
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  auto window = detail::ssim_window(radius, 1.5);

  double total = 0.0;
  long planes = 0;
  std::vector<double> pa(static_cast<size_t>(H * W)), pb(static_cast<size_t>(H * W)), paa(pa.size()), pbb(pa.size()),
      pab(pa.size());
  for (long t = 0; t < T; ++t)
    for (long c = 0; c < C; ++c) {
      for (long p = 0; p < H * W; ++p) {
        double va = a[(t * H * W + p) * C + c];
        double vb = b[(t * H * W + p) * C + c];
        pa[static_cast<size_t>(p)] = va;
        pb[static_cast<size_t>(p)] = vb;
        paa[static_cast<size_t>(p)] = va * va;
        pbb[static_cast<size_t>(p)] = vb * vb;
        pab[static_cast<size_t>(p)] = va * vb;
      }
      auto mu_a = detail::filter_plane(pa, H, W, window);
      auto mu_b = detail::filter_plane(pb, H, W, window);
      auto m_aa = detail::filter_plane(paa, H, W, window);
      auto m_bb = detail::filter_plane(pbb, H, W, window);
      auto m_ab = detail::filter_plane(pab, H, W, window);
      double acc = 0.0;
      long n = 0;
      for (long y = radius; y < H - radius; ++y)
        for (long x = radius; x < W - radius; ++x) {
          size_t p = static_cast<size_t>(y * W + x);
          double va = m_aa[p] - mu_a[p] * mu_a[p];
          double vb = m_bb[p] - mu_b[p] * mu_b[p];
          double cov = m_ab[p] - mu_a[p] * mu_b[p];
          double num = (2.0 * mu_a[p] * mu_b[p] + c1) * (2.0 * cov + c2);
          double den = (mu_a[p] * mu_a[p] + mu_b[p] * mu_b[p] + c1) * (va + vb + c2);
          acc += num / den;
          ++n;
        }
      total += acc / static_cast<double>(n);
      ++planes;
    }
  return total / static_cast<double>(planes);
}

// Intersection-over-union of two binary masks (values {0,1}); empty union
// counts as IoU 1.
inline double iou(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw DimensionError("iou: shape mismatch");
  double inter = 0.0, uni = 0.0;
  for (long i = 0; i < a.size(); ++i) {
    bool av = a[i] > 0.5, bv = b[i] > 0.5;
    inter += (av && bv) ? 1.0 : 0.0;
    uni += (av || bv) ? 1.0 : 0.0;
  }
  return uni == 0.0 ? 1.0 : inter / uni;
}

}  // namespace metrics
}  // namespace bvi
