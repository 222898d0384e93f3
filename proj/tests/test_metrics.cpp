#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bvi/io/clip_io.hpp"
#include "bvi/io/flow.hpp"
#include "bvi/metrics/evaluate.hpp"
#include "support/gradcheck.hpp"
#include "support/textures.hpp"

using namespace bvi;
namespace fs = std::filesystem;

namespace {

// Independent PSNR oracle: literal definition, one frame at a time.
double psnr_oracle(const Tensor& a, const Tensor& b) {
  long T = a.dim(0), n = a.size() / T;
  double acc = 0.0;
  for (long t = 0; t < T; ++t) {
    double se = 0.0;
    for (long i = t * n; i < (t + 1) * n; ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
    double mse = se / n;
    acc += mse <= 0.0 ? 99.0 : std::min(99.0, 10.0 * std::log10(1.0 / mse));
  }
  return acc / T;
}

// Independent SSIM oracle: brute-force windows, no separable filtering.
double ssim_oracle(const Tensor& a, const Tensor& b) {
  long T = a.dim(0), H = a.dim(1), W = a.dim(2), C = a.dim(3);
  const long r = 5;
  const double c1 = 1e-4, c2 = 9e-4, sigma = 1.5;
  double wsum = 0.0;
  double w[11][11];
  for (long dy = -r; dy <= r; ++dy)
    for (long dx = -r; dx <= r; ++dx) {
      w[dy + r][dx + r] = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
      wsum += w[dy + r][dx + r];
    }
  for (long dy = 0; dy < 11; ++dy)
    for (long dx = 0; dx < 11; ++dx) w[dy][dx] /= wsum;
  double total = 0.0;
  long planes = 0;
  for (long t = 0; t < T; ++t)
    for (long c = 0; c < C; ++c) {
      double acc = 0.0;
      long n = 0;
      for (long y = r; y < H - r; ++y)
        for (long x = r; x < W - r; ++x) {
          double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
          for (long dy = -r; dy <= r; ++dy)
            for (long dx = -r; dx <= r; ++dx) {
              double va = a.at(t, y + dy, x + dx, c), vb = b.at(t, y + dy, x + dx, c);
              double wt = w[dy + r][dx + r];
              ma += wt * va;
              mb += wt * vb;
              saa += wt * va * va;
              sbb += wt * vb * vb;
              sab += wt * va * vb;
            }
          double vara = saa - ma * ma, varb = sbb - mb * mb, cov = sab - ma * mb;
          acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (vara + varb + c2));
          ++n;
        }
      total += acc / n;
      ++planes;
    }
  return total / planes;
}

}  // namespace

TEST(Psnr, IdenticalClipsHitTheCap) {
  Rng rng(200);
  Tensor a = testsupport::synthetic_clip(3, 24, 24, rng);
  EXPECT_DOUBLE_EQ(metrics::psnr(a, a), 99.0);
}

TEST(Psnr, UniformQuantumDifference) {
  Tensor a = Tensor::full({2, 8, 8, 3}, 0.3);
  Tensor b = Tensor::full({2, 8, 8, 3}, 0.3 + 1.0 / 255.0);
  EXPECT_NEAR(metrics::psnr(a, b), 20.0 * std::log10(255.0), 1e-3);
}

TEST(Psnr, MatchesIndependentOracle) {
  Rng rng(201);
  for (int i = 0; i < 10; ++i) {
    Tensor a = testsupport::synthetic_clip(2, 16, 16, rng);
    Tensor b = testsupport::synthetic_clip(2, 16, 16, rng);
    EXPECT_NEAR(metrics::psnr(a, b), psnr_oracle(a, b), 1e-6);
    EXPECT_NEAR(metrics::psnr(a, b), metrics::psnr(b, a), 1e-12);  // symmetry
  }
}

TEST(Psnr, StrictlyDecreasesWithNoise) {
  Rng rng(202);
  Tensor a = testsupport::synthetic_clip(2, 16, 16, rng);
  double prev = 1e9;
  for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    Tensor b = a.clone();
    Rng nz(203);
    for (long i = 0; i < b.size(); ++i) b[i] = std::clamp(b[i] + amp * (2.0 * nz.uniform() - 1.0), 0.0, 1.0);
    double v = metrics::psnr(a, b);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Psnr, MaskedRegionAndEmptyRegionError) {
  Tensor a = Tensor::full({1, 4, 4, 3}, 0.5);
  Tensor b = a.clone();
  Tensor region({1, 4, 4, 1});
  region[0] = 1.0;
  b[0] = 0.9;  // damage only the selected pixel
  double masked = metrics::psnr(a, b, region);
  double full = metrics::psnr(a, b);
  EXPECT_LT(masked, full);
  Tensor empty({1, 4, 4, 1});
  EXPECT_THROW(metrics::psnr(a, b, empty), ValidationError);
}

TEST(Ssim, IdenticalClipsGiveOne) {
  Rng rng(204);
  Tensor a = testsupport::synthetic_clip(2, 16, 16, rng);
  EXPECT_NEAR(metrics::ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, InvertedBinaryClipIsNonPositive) {
  Rng rng(205);
  Tensor a({1, 16, 16, 1});
  for (long i = 0; i < a.size(); ++i) a[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  Tensor b = a.clone();
  for (long i = 0; i < b.size(); ++i) b[i] = 1.0 - b[i];
  double v = metrics::ssim(a, b);
  EXPECT_NEAR(v, ssim_oracle(a, b), 1e-4);
  EXPECT_LE(v, 0.0);
}

TEST(Ssim, MatchesIndependentOracle) {
  Rng rng(206);
  for (int i = 0; i < 10; ++i) {
    Tensor a = testsupport::synthetic_clip(1, 20, 20, rng);
    Tensor b = testsupport::synthetic_clip(1, 20, 20, rng);
    EXPECT_NEAR(metrics::ssim(a, b), ssim_oracle(a, b), 1e-4);
  }
}

TEST(Ssim, TinyFramesRejected) {
  Tensor a({1, 8, 8, 1});
  EXPECT_THROW(metrics::ssim(a, a), DimensionError);
}

TEST(Warp, StaticClipZeroFlowIsZero) {
  Tensor frame = Tensor::full({1, 8, 8, 3}, 0.4);
  Tensor clip({3, 8, 8, 3});
  for (long t = 0; t < 3; ++t) std::copy(frame.begin(), frame.end(), clip.data() + t * 8 * 8 * 3);
  Tensor flow({2, 8, 8, 2});
  EXPECT_DOUBLE_EQ(metrics::warping_error(clip, flow).value, 0.0);
}

TEST(Warp, SyntheticShiftWithMatchingFlow) {
  Rng rng(207);
  Tensor base = testsupport::synthetic_image(16, 20, rng);
  Tensor clip({2, 16, 20, 3});
  // frame1(x,y) = frame0(x-1,y): content moves one pixel right.
  for (long y = 0; y < 16; ++y)
    for (long x = 0; x < 20; ++x)
      for (long c = 0; c < 3; ++c) {
        clip.at(0, y, x, c) = base[(y * 20 + x) * 3 + c];
        clip.at(1, y, x, c) = base[(y * 20 + std::max<long>(x - 1, 0)) * 3 + c];
      }
  Tensor flow({1, 16, 20, 2});
  for (long p = 0; p < 16 * 20; ++p) flow[p * 2] = 1.0;  // (dx, dy) = (1, 0)
  EXPECT_LT(metrics::warping_error(clip, flow).value, 1e-3);
}

TEST(Warp, ZeroFlowEqualsAdjacentFrameDifference) {
  Rng rng(208);
  Tensor clip = testsupport::synthetic_clip(4, 12, 12, rng, 2.0);
  Tensor flow({3, 12, 12, 2});
  double expected = 0.0;
  for (long t = 0; t < 3; ++t) {
    double acc = 0.0;
    for (long p = 0; p < 12 * 12; ++p) {
      double d = 0.0;
      for (long c = 0; c < 3; ++c)
        d += std::fabs(clip[((t + 1) * 144 + p) * 3 + c] - clip[(t * 144 + p) * 3 + c]);
      acc += d / 3.0;
    }
    expected += acc / 144.0;
  }
  expected /= 3.0;
  EXPECT_NEAR(metrics::warping_error(clip, flow).value, expected, 1e-12);
}

TEST(Warp, AllOccludedPairSkipped) {
  Rng rng(209);
  Tensor clip = testsupport::synthetic_clip(3, 12, 12, rng);
  Tensor flow({2, 12, 12, 2});
  Tensor occ({2, 12, 12, 1});
  for (long p = 0; p < 144; ++p) occ[p] = 1.0;  // first pair fully occluded
  auto res = metrics::warping_error(clip, flow, occ);
  EXPECT_EQ(res.skipped_pairs, 1);
  EXPECT_GE(res.value, 0.0);
}

TEST(Evaluate, PerfectPredictionsAndAggregates) {
  Rng rng(210);
  fs::path root = fs::temp_directory_path() / "bvi_eval_test";
  fs::remove_all(root);
  for (int i = 0; i < 3; ++i) {
    Tensor clip = testsupport::synthetic_clip(3, 16, 16, rng);
    char name[16];
    std::snprintf(name, sizeof(name), "clip_%02d", i);
    io::save_frames(root / "gt" / name / "gt", clip);
    io::save_frames(root / "pred" / name / "completed", clip);
  }
  auto report = metrics::evaluate((root / "pred").string(), (root / "gt").string());
  ASSERT_TRUE(report.ok());
  ASSERT_EQ(report.clips.size(), 3u);
  double sum_psnr = 0.0, sum_ssim = 0.0, sum_ewarp = 0.0;
  for (const auto& c : report.clips) {
    EXPECT_DOUBLE_EQ(c.psnr, 99.0);
    EXPECT_NEAR(c.ssim, 1.0, 1e-12);
    EXPECT_TRUE(c.zero_flow);
    sum_psnr += c.psnr;
    sum_ssim += c.ssim;
    sum_ewarp += c.ewarp;
  }
  EXPECT_NEAR(report.mean_psnr, sum_psnr / 3.0, 1e-9);
  EXPECT_NEAR(report.mean_ssim, sum_ssim / 3.0, 1e-9);
  EXPECT_NEAR(report.mean_ewarp, sum_ewarp / 3.0, 1e-9);

  std::ostringstream os;
  metrics::write_report(os, report);
  std::string text = os.str();
  EXPECT_NE(text.find("# ewarp_mode: zero-flow"), std::string::npos);
  EXPECT_NE(text.find("aggregate "), std::string::npos);
  fs::remove_all(root);
}

TEST(Evaluate, EmptyAndMismatchedInputs) {
  fs::path root = fs::temp_directory_path() / "bvi_eval_empty";
  fs::remove_all(root);
  fs::create_directories(root / "pred");
  fs::create_directories(root / "gt");
  auto report = metrics::evaluate((root / "pred").string(), (root / "gt").string());
  EXPECT_FALSE(report.ok());
  EXPECT_TRUE(report.clips.empty());

  // A clip with no ground-truth partner is an itemized error, not an abort.
  Rng rng(211);
  Tensor clip = testsupport::synthetic_clip(2, 16, 16, rng);
  io::save_frames(root / "pred" / "clip_a" / "completed", clip);
  io::save_frames(root / "pred" / "clip_b" / "completed", clip);
  io::save_frames(root / "gt" / "clip_b" / "gt", clip);
  report = metrics::evaluate((root / "pred").string(), (root / "gt").string());
  EXPECT_EQ(report.clips.size(), 1u);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].first, "clip_a");
  fs::remove_all(root);
}
