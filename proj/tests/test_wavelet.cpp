#include <gtest/gtest.h>

#include "bvi/wavelet/haar.hpp"
#include "support/gradcheck.hpp"

using namespace bvi;

namespace {

// Independent oracle: evaluate the four 2x2 analysis formulas directly on one
// block, no shared code with the implementation's traversal.
void block_oracle(double a, double b, double c, double d, double out[4]) {
  out[0] = (a + b + c + d) / 2.0;
  out[1] = (a - b + c - d) / 2.0;
  out[2] = (a + b - c - d) / 2.0;
  out[3] = (a - b - c + d) / 2.0;
}

}  // namespace

TEST(Wavelet, ConstantFrameKillsHighPass) {
  Tensor x = Tensor::full({1, 2, 2, 1}, 1.0);
  Subbands s = dwt2d(x);
  EXPECT_DOUBLE_EQ(s.ll[0], 2.0);
  EXPECT_DOUBLE_EQ(s.lh[0], 0.0);
  EXPECT_DOUBLE_EQ(s.hl[0], 0.0);
  EXPECT_DOUBLE_EQ(s.hh[0], 0.0);
}

TEST(Wavelet, CheckerboardBlock) {
  // [1,0;0,1] -> LL = 1, HH = 1, LH = HL = 0, from the hand oracle.
  Tensor x = Tensor::from({1, 2, 2, 1}, {1.0, 0.0, 0.0, 1.0});
  double expect[4];
  block_oracle(1.0, 0.0, 0.0, 1.0, expect);
  Subbands s = dwt2d(x);
  EXPECT_DOUBLE_EQ(s.ll[0], expect[0]);
  EXPECT_DOUBLE_EQ(s.lh[0], expect[1]);
  EXPECT_DOUBLE_EQ(s.hl[0], expect[2]);
  EXPECT_DOUBLE_EQ(s.hh[0], expect[3]);
  EXPECT_DOUBLE_EQ(s.ll[0], 1.0);
  EXPECT_DOUBLE_EQ(s.hh[0], 1.0);
}

TEST(Wavelet, MatchesBlockOracleOnRandomInput) {
  Rng rng(3);
  Tensor x = testsupport::random_tensor({2, 6, 4, 3}, rng);
  Subbands s = dwt2d(x);
  for (long t = 0; t < 2; ++t)
    for (long oy = 0; oy < 3; ++oy)
      for (long ox = 0; ox < 2; ++ox)
        for (long c = 0; c < 3; ++c) {
          double out[4];
          block_oracle(x.at(t, 2 * oy, 2 * ox, c), x.at(t, 2 * oy, 2 * ox + 1, c), x.at(t, 2 * oy + 1, 2 * ox, c),
                       x.at(t, 2 * oy + 1, 2 * ox + 1, c), out);
          EXPECT_NEAR(s.ll.at(t, oy, ox, c), out[0], 1e-12);
          EXPECT_NEAR(s.lh.at(t, oy, ox, c), out[1], 1e-12);
          EXPECT_NEAR(s.hl.at(t, oy, ox, c), out[2], 1e-12);
          EXPECT_NEAR(s.hh.at(t, oy, ox, c), out[3], 1e-12);
        }
}

TEST(Wavelet, RoundTripIdentity) {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    Tensor x = testsupport::random_tensor({rng.uniform_int(1, 8), 2 * rng.uniform_int(1, 16), 2 * rng.uniform_int(1, 16),
                                           rng.uniform_int(1, 16)},
                                          rng);
    Tensor back = idwt2d(dwt2d(x));
    EXPECT_LT(max_abs_diff(back, x), 1e-6);
  }
}

TEST(Wavelet, EnergyConservation) {
  Rng rng(4);
  Tensor x = testsupport::random_tensor({4, 16, 16, 8}, rng);
  Subbands s = dwt2d(x);
  double ein = x.sum_squares();
  EXPECT_NEAR(s.energy(), ein, 1e-6 * ein);
}

TEST(Wavelet, Linearity) {
  Rng rng(5);
  Tensor x = testsupport::random_tensor({1, 8, 8, 2}, rng);
  Tensor y = testsupport::random_tensor({1, 8, 8, 2}, rng);
  double alpha = 0.7, beta = -1.3;
  Tensor mix(x.shape());
  for (long i = 0; i < mix.size(); ++i) mix[i] = alpha * x[i] + beta * y[i];
  Subbands sm = dwt2d(mix), sx = dwt2d(x), sy = dwt2d(y);
  const Tensor* ms[4] = {&sm.ll, &sm.lh, &sm.hl, &sm.hh};
  const Tensor* xs[4] = {&sx.ll, &sx.lh, &sx.hl, &sx.hh};
  const Tensor* ys[4] = {&sy.ll, &sy.lh, &sy.hl, &sy.hh};
  for (int b = 0; b < 4; ++b)
    for (long i = 0; i < ms[b]->size(); ++i)
      EXPECT_NEAR((*ms[b])[i], alpha * (*xs[b])[i] + beta * (*ys[b])[i], 1e-6);
}

TEST(Wavelet, BlockConstantInputHasZeroHighBands) {
  Rng rng(6);
  Tensor x({1, 8, 8, 1});
  for (long oy = 0; oy < 4; ++oy)
    for (long ox = 0; ox < 4; ++ox) {
      double v = rng.uniform();
      for (long dy = 0; dy < 2; ++dy)
        for (long dx = 0; dx < 2; ++dx) x.at(0, 2 * oy + dy, 2 * ox + dx, 0) = v;
    }
  Subbands s = dwt2d(x);
  EXPECT_DOUBLE_EQ(s.lh.max_abs(), 0.0);
  EXPECT_DOUBLE_EQ(s.hl.max_abs(), 0.0);
  EXPECT_DOUBLE_EQ(s.hh.max_abs(), 0.0);
}

TEST(Wavelet, InverseSingleCoefficient) {
  // LL = 2 with zero high bands on a 1x1 grid inverts to a constant 2x2
  // frame of ones (hand inversion of the synthesis formulas).
  Subbands s{Tensor::full({1, 1, 1, 1}, 2.0), Tensor({1, 1, 1, 1}), Tensor({1, 1, 1, 1}), Tensor({1, 1, 1, 1})};
  Tensor x = idwt2d(s);
  require_shape(x, {1, 2, 2, 1}, "idwt output");
  for (long i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(x[i], 1.0);
}

TEST(Wavelet, ZeroSubbandsGiveZeroOutput) {
  Subbands s{Tensor({2, 3, 3, 2}), Tensor({2, 3, 3, 2}), Tensor({2, 3, 3, 2}), Tensor({2, 3, 3, 2})};
  Tensor x = idwt2d(s);
  EXPECT_DOUBLE_EQ(x.max_abs(), 0.0);
}

TEST(Wavelet, OddDimensionsRejected) {
  EXPECT_THROW(dwt2d(Tensor({1, 3, 4, 1})), DimensionError);
  EXPECT_THROW(dwt2d(Tensor({1, 4, 5, 1})), DimensionError);
}

TEST(Wavelet, NonFiniteRejected) {
  Tensor x({1, 2, 2, 1});
  x[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(dwt2d(x), ValidationError);
}

TEST(Wavelet, MismatchedSubbandsRejected) {
  Subbands s{Tensor({1, 2, 2, 1}), Tensor({1, 2, 2, 1}), Tensor({1, 2, 3, 1}), Tensor({1, 2, 2, 1})};
  EXPECT_THROW(idwt2d(s), DimensionError);
}

TEST(Wavelet, AutodiffMatchesFiniteDifferences) {
  Rng rng(12);
  Tensor x = testsupport::random_tensor({1, 4, 4, 2}, rng);
  // Loss: sum of squares of the stacked analysis output.
  auto build_fwd = [](Graph& g, const Var& in) {
    Var s = ops::dwt2d_stacked(g, in);
    return ops::sum(g, ops::mul(g, s, s));
  };
  EXPECT_LT(testsupport::check_input_gradient(x, build_fwd), 1e-6);
  Tensor st = testsupport::random_tensor({1, 2, 2, 8}, rng);
  auto build_inv = [](Graph& g, const Var& in) {
    Var s = ops::idwt2d_stacked(g, in);
    return ops::sum(g, ops::mul(g, s, s));
  };
  EXPECT_LT(testsupport::check_input_gradient(st, build_inv), 1e-6);
}
