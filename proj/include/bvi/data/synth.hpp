#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bvi/data/animate.hpp"
#include "bvi/data/blend.hpp"
#include "bvi/data/clip.hpp"
#include "bvi/data/strokes.hpp"

namespace bvi {

// Corruption content source. Natural patches come from a user-supplied image
// pool; noise and constant fills exist to probe robustness against fill
// patterns the model was not trained on.
enum class FillMode { kNatural, kNoise, kConstant };

inline FillMode fill_mode_from(const std::string& s) {
  if (s == "natural") return FillMode::kNatural;
  if (s == "noise") return FillMode::kNoise;
  if (s == "constant") return FillMode::kConstant;
  throw ConfigError("unknown fill mode '" + s + "' (natural|noise|constant)");
}

namespace data {

// (H,W,3) crop with the window drifting one random step per frame.
struct PatchSampler {
  const Tensor* image;
  double ox, oy;

  PatchSampler(const Tensor& img, long H, long W, Rng& rng) : image(&img) {
    if (img.ndim() != 4 || img.dim(0) != 1 || img.dim(3) != 3)
      throw DimensionError("content pool images must be (1,h,w,3)");
    if (img.dim(1) < H || img.dim(2) < W)
      throw ValidationError("content image smaller than the requested patch");
    ox = rng.uniform(0.0, static_cast<double>(img.dim(2) - W));
    oy = rng.uniform(0.0, static_cast<double>(img.dim(1) - H));
  }

  Tensor next(long H, long W, Rng& rng) {
    ox = std::clamp(ox + rng.uniform(-1.0, 1.0), 0.0, static_cast<double>(image->dim(2) - W));
    oy = std::clamp(oy + rng.uniform(-1.0, 1.0), 0.0, static_cast<double>(image->dim(1) - H));
    long x0 = static_cast<long>(ox), y0 = static_cast<long>(oy);
    Tensor out({H, W, 3});
    for (long y = 0; y < H; ++y)
      for (long x = 0; x < W; ++x)
        for (long c = 0; c < 3; ++c) out[(y * W + x) * 3 + c] = image->at(0, y0 + y, x0 + x, c);
    return out;
  }
};

}  // namespace data

// End-to-end clip corruption: one free-form mask, animated over T frames,
// filled per frame and blended. The same seed reproduces the triple bit for
// bit. Content pool images are (h,w,3) with h >= H, w >= W for natural fills.
inline ClipTriple synth_clip(const Tensor& gt, const std::vector<Tensor>& content_pool, const StrokeParams& strokes,
                             const MotionParams& motion, const SmoothingParams& smoothing, FillMode fill,
                             uint64_t seed, const std::string& source_tag = "") {
  if (gt.ndim() != 4 || gt.dim(3) != 3) throw DimensionError("synth_clip: ground truth must be (T,H,W,3)");
  require_unit_range(gt, "synth_clip ground truth");
  long T = gt.dim(0), H = gt.dim(1), W = gt.dim(2);
  Rng rng(seed);

  Tensor base = gen_freeform_mask(H, W, strokes, rng);
  Tensor masks = animate_mask(base, T, motion, rng);

  ClipTriple clip;
  clip.seed = seed;
  clip.coverage = data::coverage_of(base);
  clip.y = gt.clone();
  clip.m = masks;
  clip.x = Tensor({T, H, W, 3});

  std::unique_ptr<data::PatchSampler> sampler;
  double cr = 0, cg = 0, cb = 0;
  std::string source = source_tag;
  switch (fill) {
    case FillMode::kNatural: {
      if (content_pool.empty()) throw ValidationError("synth_clip: natural fill needs a content pool");
      long pick = rng.uniform_int(0, static_cast<long>(content_pool.size()) - 1);
      sampler = std::make_unique<data::PatchSampler>(content_pool[static_cast<size_t>(pick)], H, W, rng);
      source += (source.empty() ? "" : ",") + std::string("pool:") + std::to_string(pick);
      break;
    }
    case FillMode::kConstant:
      cr = rng.uniform();
      cg = rng.uniform();
      cb = rng.uniform();
      source += (source.empty() ? "" : ",") + std::string("constant");
      break;
    case FillMode::kNoise:
      source += (source.empty() ? "" : ",") + std::string("noise");
      break;
  }
  clip.sources = source;

  Tensor frame_y({H, W, 3}), frame_m({H, W});
  for (long t = 0; t < T; ++t) {
    std::copy(gt.data() + t * H * W * 3, gt.data() + (t + 1) * H * W * 3, frame_y.data());
    std::copy(masks.data() + t * H * W, masks.data() + (t + 1) * H * W, frame_m.data());
    Tensor u({H, W, 3});
    switch (fill) {
      case FillMode::kNatural:
        u = sampler->next(H, W, rng);
        break;
      case FillMode::kNoise:
        for (long i = 0; i < u.size(); ++i) u[i] = std::clamp(0.5 + 0.25 * rng.normal(), 0.0, 1.0);
        break;
      case FillMode::kConstant:
        for (long p = 0; p < H * W; ++p) {
          u[p * 3 + 0] = cr;
          u[p * 3 + 1] = cg;
          u[p * 3 + 2] = cb;
        }
        break;
    }
    Tensor corrupted = blend_fill(frame_y, frame_m, u, smoothing);
    std::copy(corrupted.begin(), corrupted.end(), clip.x.data() + t * H * W * 3);
  }
  return clip;
}

}  // namespace bvi
