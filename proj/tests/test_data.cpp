#include <gtest/gtest.h>

#include "bvi/data/synth.hpp"
#include "bvi/loss/losses.hpp"
#include "support/textures.hpp"

using namespace bvi;

namespace {

double frame_coverage(const Tensor& seq, long t) {
  long pixels = seq.dim(1) * seq.dim(2);
  double c = 0.0;
  for (long p = 0; p < pixels; ++p) c += seq[t * pixels + p];
  return c / static_cast<double>(pixels);
}

}  // namespace

TEST(Strokes, CoverageAlwaysWithinBounds) {
  StrokeParams p;
  Rng rng(101);
  for (int i = 0; i < 50; ++i) {
    Tensor m = gen_freeform_mask(240, 240, p, rng);
    double c = data::coverage_of(m);
    EXPECT_GE(c, p.coverage_min);
    EXPECT_LE(c, p.coverage_max);
  }
}

TEST(Strokes, SameSeedIsBitIdentical) {
  StrokeParams p;
  Rng a(500), b(500);
  Tensor ma = gen_freeform_mask(128, 128, p, a);
  Tensor mb = gen_freeform_mask(128, 128, p, b);
  EXPECT_EQ(max_abs_diff(ma, mb), 0.0);
}

TEST(Strokes, MeanCoverageAtDefaults) {
  // Monte-Carlo oracle fixed before the defaults were frozen: 1,000 samples
  // at 240p must average inside [0.10, 0.30].
  StrokeParams p;
  Rng rng(12345);
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) sum += data::coverage_of(gen_freeform_mask(240, 240, p, rng));
  double mean = sum / 1000.0;
  EXPECT_GE(mean, 0.10);
  EXPECT_LE(mean, 0.30);
}

TEST(Strokes, RejectsTinyFramesAndBadBounds) {
  StrokeParams p;
  Rng rng(1);
  EXPECT_THROW(gen_freeform_mask(40, 240, p, rng), ValidationError);  // < 2 * width_max
  StrokeParams bad;
  bad.coverage_min = 0.5;
  bad.coverage_max = 0.4;
  EXPECT_THROW(gen_freeform_mask(240, 240, bad, rng), ConfigError);
}

TEST(Strokes, UnreachableCoverageExhaustsRetryBudget) {
  StrokeParams p;
  p.coverage_min = 0.90;  // a few strokes cannot reach 90 percent
  p.coverage_max = 0.95;
  p.retry_budget = 5;
  Rng rng(2);
  EXPECT_THROW(gen_freeform_mask(240, 240, p, rng), GenerationError);
}

TEST(Animate, ZeroMotionCopiesBaseMask) {
  StrokeParams p;
  Rng rng(103);
  Tensor base = gen_freeform_mask(128, 128, p, rng);
  MotionParams still{0.0, 0.0, 0.0};
  Tensor seq = animate_mask(base, 4, still, rng);
  for (long t = 0; t < 4; ++t)
    for (long i = 0; i < 128 * 128; ++i) EXPECT_EQ(seq[t * 128 * 128 + i], base[i]);
}

TEST(Animate, PureTranslationMatchesShiftOracle) {
  // Translation-only motion: frame t must equal the base mask shifted by the
  // t-fold accumulated delta, cropped at the borders.
  StrokeParams p;
  p.width_min = 6;
  p.width_max = 12;
  Rng rng(104);
  Tensor base = gen_freeform_mask(96, 96, p, rng);
  MotionParams slide{5.0, 0.0, 0.0};
  Rng gen(105);
  Tensor seq = animate_mask(base, 4, slide, gen);
  Rng replay(105);  // animate_mask draws dx, dy first
  double dx = replay.uniform(-5.0, 5.0);
  double dy = replay.uniform(-5.0, 5.0);
  for (long t = 0; t < 4; ++t) {
    long sx = std::lround(t * dx), sy = std::lround(t * dy);
    for (long y = 0; y < 96; ++y)
      for (long x = 0; x < 96; ++x) {
        long bx = x - sx, by = y - sy;
        double expect = (bx >= 0 && bx < 96 && by >= 0 && by < 96) ? base[by * 96 + bx] : 0.0;
        ASSERT_EQ(seq.at(t, y, x, 0), expect) << "t=" << t << " y=" << y << " x=" << x;
      }
  }
}

TEST(Animate, CoverageStableUnderDefaultJitter) {
  // Sampling oracle frozen with the defaults: per-frame coverage within
  // +/-30 percent of frame 0 over 50 animated masks.
  StrokeParams p;
  MotionParams mo;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Tensor base = gen_freeform_mask(240, 240, p, rng);
    Tensor seq = animate_mask(base, 8, mo, rng);
    double c0 = frame_coverage(seq, 0);
    for (long t = 1; t < 8; ++t) {
      double ratio = frame_coverage(seq, t) / c0;
      EXPECT_GE(ratio, 0.70) << "clip " << i << " frame " << t;
      EXPECT_LE(ratio, 1.30) << "clip " << i << " frame " << t;
    }
  }
}

TEST(Animate, ReclampsWhenMaskLeavesFrame) {
  // A small blob pushed far out of frame must be pulled back, not vanish.
  Tensor base({64, 64});
  for (long y = 30; y < 34; ++y)
    for (long x = 30; x < 34; ++x) base[y * 64 + x] = 1.0;
  MotionParams violent{40.0, 0.0, 0.0};
  Rng rng(106);
  Tensor seq = animate_mask(base, 6, violent, rng);
  for (long t = 0; t < 6; ++t) EXPECT_GT(frame_coverage(seq, t), 0.0) << "frame " << t;
}

TEST(Blend, MaskZeroReturnsGroundTruthExactly) {
  Rng rng(107);
  Tensor y = testsupport::synthetic_image(64, 64, rng);
  Tensor u = testsupport::synthetic_image(64, 64, rng);
  Tensor m({64, 64});
  Tensor x = blend_fill(y, m, u, {});
  EXPECT_EQ(max_abs_diff(x, y), 0.0);
}

TEST(Blend, FullMaskNoBandReturnsContentExactly) {
  Rng rng(108);
  Tensor y = testsupport::synthetic_image(48, 48, rng);
  Tensor u = testsupport::synthetic_image(48, 48, rng);
  Tensor m = Tensor::full({48, 48}, 1.0);
  Tensor x = blend_fill(y, m, u, {3, 1.5, 0});
  EXPECT_EQ(max_abs_diff(x, u), 0.0);
}

TEST(Blend, SmoothingReducesBoundaryGradient) {
  // Threshold frozen by the pre-build oracle on a 20-sample corpus (observed
  // mean reduction 0.74, worst 0.72); asserted at the 30 percent contract.
  StrokeParams p;
  SmoothingParams sp;
  Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    Tensor img = testsupport::synthetic_image(240, 240, rng);
    Tensor content = testsupport::synthetic_image(240, 240, rng);
    Tensor m = gen_freeform_mask(240, 240, p, rng);
    Tensor raw = blend_fill(img, m, content, {1, sp.sigma, 0});
    Tensor smooth = blend_fill(img, m, content, sp);
    double graw = data::boundary_gradient(raw, m);
    double gsm = data::boundary_gradient(smooth, m);
    ASSERT_GT(graw, 0.0);
    EXPECT_LE(gsm, 0.7 * graw) << "sample " << i;
  }
}

TEST(Blend, WritesOnlyInsideBand) {
  Rng rng(109);
  Tensor y = testsupport::synthetic_image(64, 64, rng);
  Tensor u = testsupport::synthetic_image(64, 64, rng);
  StrokeParams p;
  p.width_min = 6;
  p.width_max = 10;
  Tensor m = gen_freeform_mask(64, 64, p, rng);
  SmoothingParams sp;
  Tensor x = blend_fill(y, m, u, sp);
  Tensor outside = data::dilate(m, sp.band);
  for (long px = 0; px < 64 * 64; ++px)
    if (outside[px] <= 0.5)
      for (long c = 0; c < 3; ++c) ASSERT_EQ(x[px * 3 + c], y[px * 3 + c]);
}

TEST(SynthClip, DeterministicAndLocal) {
  Rng rng(110);
  Tensor gt = testsupport::synthetic_clip(4, 64, 64, rng);
  std::vector<Tensor> pool{testsupport::synthetic_image(96, 96, rng).reshaped({1, 96, 96, 3})};
  StrokeParams p;
  p.width_min = 5;
  p.width_max = 9;
  p.seglen_min = 5;
  p.seglen_max = 18;
  SmoothingParams sp;
  ClipTriple a = synth_clip(gt, pool, p, {}, sp, FillMode::kNatural, 42);
  ClipTriple b = synth_clip(gt, pool, p, {}, sp, FillMode::kNatural, 42);
  EXPECT_EQ(max_abs_diff(a.x, b.x), 0.0);
  EXPECT_EQ(max_abs_diff(a.m, b.m), 0.0);

  // X equals Y outside the dilated band, exactly.
  Tensor banded = data::dilate_sequence(a.m, sp.band);
  long pixels = 64 * 64;
  for (long t = 0; t < 4; ++t)
    for (long px = 0; px < pixels; ++px)
      if (banded[t * pixels + px] <= 0.5)
        for (long c = 0; c < 3; ++c)
          ASSERT_EQ(a.x[(t * pixels + px) * 3 + c], a.y[(t * pixels + px) * 3 + c]);

  // Difference containment: binarize(|X-Y|, 2/255) inside dilate(M, band).
  Tensor changed = losses::hard_difference_mask(a.x, a.y);
  for (long i = 0; i < changed.size(); ++i)
    if (changed[i] > 0.5) ASSERT_GT(banded[i], 0.5);
}

TEST(SynthClip, FillModes) {
  Rng rng(111);
  Tensor gt = testsupport::synthetic_clip(2, 48, 48, rng);
  StrokeParams p;
  p.width_min = 4;
  p.width_max = 8;
  p.seglen_min = 4;
  p.seglen_max = 12;
  ClipTriple noise = synth_clip(gt, {}, p, {}, {}, FillMode::kNoise, 9);
  ClipTriple constant = synth_clip(gt, {}, p, {}, {}, FillMode::kConstant, 9);
  EXPECT_EQ(noise.sources, "noise");
  EXPECT_EQ(constant.sources, "constant");
  // Same seed, same masks, different fill contents.
  EXPECT_EQ(max_abs_diff(noise.m, constant.m), 0.0);
  EXPECT_THROW(synth_clip(gt, {}, p, {}, {}, FillMode::kNatural, 9), ValidationError);
}
