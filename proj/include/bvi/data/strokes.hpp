#pragma once

#include <cmath>

#include "bvi/core/rng.hpp"
#include "bvi/core/tensor.hpp"

namespace bvi {

// Free-form stroke masks: random polylines with bounded per-vertex turning,
// rasterized with a round brush, rejection-sampled until the covered area
// fraction lands inside [coverage_min, coverage_max]. Defaults are tuned for
// 240p frames; scale widths and segment lengths for other resolutions.
struct StrokeParams {
  long strokes_min = 1, strokes_max = 4;
  long vertices_min = 4, vertices_max = 12;
  double width_min = 8.0, width_max = 24.0;
  double turn_max = 0.7;  // radians per vertex
  double seglen_min = 15.0, seglen_max = 60.0;
  double coverage_min = 0.05, coverage_max = 0.40;
  long retry_budget = 100;

  void validate() const {
    if (!(coverage_min > 0.0 && coverage_min < coverage_max && coverage_max < 1.0))
      throw ConfigError("StrokeParams: need 0 < coverage_min < coverage_max < 1");
    if (width_min < 1.0 || width_max < width_min) throw ConfigError("StrokeParams: brush widths must be >= 1");
    if (strokes_min < 1 || strokes_max < strokes_min || vertices_min < 1 || vertices_max < vertices_min)
      throw ConfigError("StrokeParams: bad stroke/vertex ranges");
    if (seglen_min <= 0.0 || seglen_max < seglen_min) throw ConfigError("StrokeParams: bad segment lengths");
    if (turn_max < 0.0) throw ConfigError("StrokeParams: negative turn bound");
  }
};

namespace data {

// Stamps the capsule (segment with round caps) of radius r onto mask.
inline void draw_capsule(Tensor& mask, double x0, double y0, double x1, double y1, double r) {
  long H = mask.dim(0), W = mask.dim(1);
  long ylo = std::max<long>(0, static_cast<long>(std::floor(std::min(y0, y1) - r)));
  long yhi = std::min<long>(H - 1, static_cast<long>(std::ceil(std::max(y0, y1) + r)));
  long xlo = std::max<long>(0, static_cast<long>(std::floor(std::min(x0, x1) - r)));
  long xhi = std::min<long>(W - 1, static_cast<long>(std::ceil(std::max(x0, x1) + r)));
  double dx = x1 - x0, dy = y1 - y0;
  double len2 = dx * dx + dy * dy;
  for (long y = ylo; y <= yhi; ++y)
    for (long x = xlo; x <= xhi; ++x) {
      double t = len2 > 0.0 ? ((x - x0) * dx + (y - y0) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      double px = x0 + t * dx, py = y0 + t * dy;
      double d2 = (x - px) * (x - px) + (y - py) * (y - py);
      if (d2 <= r * r) mask[y * W + x] = 1.0;
    }
}

inline double coverage_of(const Tensor& mask) { return mask.sum() / static_cast<double>(mask.size()); }

}  // namespace data

// One binary (H,W) mask; same seed state -> same mask.
inline Tensor gen_freeform_mask(long H, long W, const StrokeParams& p, Rng& rng) {
  p.validate();
  if (H < 2 * p.width_max || W < 2 * p.width_max)
    throw ValidationError("gen_freeform_mask: frame must be at least twice the max brush width");
  for (long attempt = 0; attempt < p.retry_budget; ++attempt) {
    Tensor mask({H, W});
    long strokes = rng.uniform_int(p.strokes_min, p.strokes_max);
    for (long s = 0; s < strokes; ++s) {
      double radius = rng.uniform(p.width_min, p.width_max) / 2.0;
      // Vertices stay one brush radius inside the frame so strokes are not
      // half-clipped at the borders.
      double x = rng.uniform(radius, static_cast<double>(W - 1) - radius);
      double y = rng.uniform(radius, static_cast<double>(H - 1) - radius);
      double angle = rng.uniform(0.0, 2.0 * M_PI);
      long vertices = rng.uniform_int(p.vertices_min, p.vertices_max);
      for (long v = 0; v < vertices; ++v) {
        angle += rng.uniform(-p.turn_max, p.turn_max);
        double len = rng.uniform(p.seglen_min, p.seglen_max);
        double nx = std::clamp(x + len * std::cos(angle), radius, static_cast<double>(W - 1) - radius);
        double ny = std::clamp(y + len * std::sin(angle), radius, static_cast<double>(H - 1) - radius);
        data::draw_capsule(mask, x, y, nx, ny, radius);
        x = nx;
        y = ny;
      }
    }
    double cov = data::coverage_of(mask);
    if (cov >= p.coverage_min && cov <= p.coverage_max) return mask;
  }
  throw GenerationError("gen_freeform_mask: coverage bounds unreachable within the retry budget");
}

}  // namespace bvi
