#include <gtest/gtest.h>

#include "bvi/mask/masknet.hpp"
#include "support/gradcheck.hpp"

using namespace bvi;

namespace {

MaskNetConfig toy_cfg() {
  MaskNetConfig cfg;
  cfg.base_channels = 4;
  cfg.refine_blocks = 1;
  cfg.window.groups = 2;
  cfg.window.spatial_radius = 2;
  cfg.window.temporal_extent = 4;
  return cfg;
}

Tensor random_clip(long T, long H, long W, long C, uint64_t seed) {
  Rng rng(seed);
  return testsupport::random_tensor({T, H, W, C}, rng, 0.0, 1.0);
}

}  // namespace

TEST(ShortTerm, ShapeAndRange) {
  ParamSet params(5);
  MaskNetConfig cfg = toy_cfg();
  Graph g;
  Bound P(g, params, false);
  Tensor frame = random_clip(1, 48, 48, 3, 1);
  Var m = masknet::short_term(g, P, cfg, g.constant(frame));
  require_shape(m->val, {1, 48, 48, 1}, "short_term output");
  for (long i = 0; i < m->val.size(); ++i) {
    EXPECT_GE(m->val[i], 0.0);
    EXPECT_LE(m->val[i], 1.0);
  }
}

TEST(ShortTerm, IdenticalFramesGiveIdenticalMasks) {
  ParamSet params(6);
  MaskNetConfig cfg = toy_cfg();
  Tensor one = random_clip(1, 16, 16, 3, 2);
  Tensor two({2, 16, 16, 3});
  std::copy(one.begin(), one.end(), two.begin());
  std::copy(one.begin(), one.end(), two.begin() + one.size());
  Graph g;
  Bound P(g, params, false);
  Var m = masknet::short_term(g, P, cfg, g.constant(two));
  for (long i = 0; i < m->val.size() / 2; ++i) EXPECT_DOUBLE_EQ(m->val[i], m->val[m->val.size() / 2 + i]);
}

TEST(ShortTerm, RejectsBadShapes) {
  ParamSet params(7);
  MaskNetConfig cfg = toy_cfg();
  Graph g;
  Bound P(g, params, false);
  EXPECT_THROW(masknet::short_term(g, P, cfg, g.constant(Tensor({1, 20, 48, 3}))), DimensionError);
  Tensor bad = Tensor::full({1, 16, 16, 3}, 1.5);
  EXPECT_THROW(masknet::check_clip_range(bad, "clip"), ValidationError);
}

TEST(WindowAttention, SingleTokenWindowIsIdentity) {
  // T=1, H=W=1, one group: softmax over one key gives affinity 1, so the
  // aggregated features equal V and the gate equals 1.
  Rng rng(31);
  Tensor q = testsupport::random_tensor({1, 1, 1, 4}, rng);
  Tensor k = testsupport::random_tensor({1, 1, 1, 4}, rng);
  Tensor v = testsupport::random_tensor({1, 1, 1, 4}, rng);
  WindowAttentionConfig cfg;
  cfg.groups = 1;
  cfg.spatial_radius = 3;
  cfg.temporal_extent = 1;
  Graph g;
  Var bias = g.constant(Tensor({1, 1, 7, 7}));
  Var core = ops::windowed_st_attention_core(g, g.constant(q), g.constant(k), g.constant(v), bias, cfg);
  require_shape(core->val, {1, 1, 1, 5}, "core output");
  for (long c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(core->val[c], v[c]);
  EXPECT_DOUBLE_EQ(core->val[4], 1.0);
}

TEST(WindowAttention, AffinityRowsSumToOne) {
  // With V identically one, each aggregated channel equals the affinity row
  // sum of its group.
  Rng rng(32);
  WindowAttentionConfig cfg;
  cfg.groups = 2;
  cfg.spatial_radius = 1;
  cfg.temporal_extent = 3;
  Tensor q = testsupport::random_tensor({3, 5, 4, 6}, rng);
  Tensor k = testsupport::random_tensor({3, 5, 4, 6}, rng);
  Tensor v = Tensor::full({3, 5, 4, 6}, 1.0);
  Tensor bias = testsupport::random_tensor({2, 5, 3, 3}, rng, -0.2, 0.2);
  Graph g;
  Var core = ops::windowed_st_attention_core(g, g.constant(q), g.constant(k), g.constant(v), g.constant(bias), cfg);
  for (long p = 0; p < 3 * 5 * 4; ++p)
    for (long c = 0; c < 6; ++c) EXPECT_NEAR(core->val[p * 7 + c], 1.0, 1e-5);
}

TEST(WindowAttention, GateInUnitInterval) {
  Rng rng(33);
  WindowAttentionConfig cfg;
  cfg.groups = 2;
  cfg.spatial_radius = 2;
  cfg.temporal_extent = 2;
  Tensor q = testsupport::random_tensor({2, 6, 6, 4}, rng);
  Tensor k = testsupport::random_tensor({2, 6, 6, 4}, rng);
  Tensor v = testsupport::random_tensor({2, 6, 6, 4}, rng);
  Tensor bias = testsupport::random_tensor({2, 3, 5, 5}, rng, -0.5, 0.5);
  Graph g;
  Var core = ops::windowed_st_attention_core(g, g.constant(q), g.constant(k), g.constant(v), g.constant(bias), cfg);
  for (long p = 0; p < 2 * 6 * 6; ++p) {
    double gate = core->val[p * 5 + 4];
    EXPECT_GT(gate, 0.0);
    EXPECT_LE(gate, 1.0);
  }
}

TEST(WindowAttention, GroupsMustDivideChannels) {
  WindowAttentionConfig cfg;
  cfg.groups = 3;
  Graph g;
  Tensor q({1, 2, 2, 4});
  Var bias = g.constant(Tensor({3, 15, 7, 7}));
  EXPECT_THROW(
      ops::windowed_st_attention_core(g, g.constant(q), g.constant(q), g.constant(q), bias, cfg),
      ConfigError);
}

TEST(WindowAttention, GradientsMatchFiniteDifferences) {
  // (2,4,4,8) input as pinned by the module contract; tolerance 1e-3.
  Rng rng(34);
  WindowAttentionConfig cfg;
  cfg.groups = 2;
  cfg.spatial_radius = 1;
  cfg.temporal_extent = 2;
  Tensor q = testsupport::random_tensor({2, 4, 4, 8}, rng);
  Tensor k = testsupport::random_tensor({2, 4, 4, 8}, rng);
  Tensor v = testsupport::random_tensor({2, 4, 4, 8}, rng);
  Tensor bias = testsupport::random_tensor({2, 3, 3, 3}, rng, -0.3, 0.3);

  auto loss_of = [&](Graph& g, Var qv, Var kv, Var vv, Var bv) {
    Var core = ops::windowed_st_attention_core(g, qv, kv, vv, bv, cfg);
    return ops::sum(g, ops::mul(g, core, core));
  };
  auto check = [&](Tensor& which, int slot) {
    auto build = [&](Graph& g, const Var& in) {
      Var qv = slot == 0 ? in : g.constant(q);
      Var kv = slot == 1 ? in : g.constant(k);
      Var vv = slot == 2 ? in : g.constant(v);
      Var bv = slot == 3 ? in : g.constant(bias);
      return loss_of(g, qv, kv, vv, bv);
    };
    return testsupport::check_input_gradient(which, build, 1e-5, 24, 55 + static_cast<uint64_t>(slot));
  };
  EXPECT_LT(check(q, 0), 1e-3);
  EXPECT_LT(check(k, 1), 1e-3);
  EXPECT_LT(check(v, 2), 1e-3);
  EXPECT_LT(check(bias, 3), 1e-3);
}

TEST(Refine, ShapeRangeAndAlignment) {
  ParamSet params(8);
  MaskNetConfig cfg = toy_cfg();
  cfg.window.temporal_extent = 8;
  Graph g;
  Bound P(g, params, false);
  Tensor x = random_clip(8, 48, 48, 3, 3);
  Tensor ms = random_clip(8, 48, 48, 1, 4);
  Var ml = masknet::refine(g, P, cfg, g.constant(x), g.constant(ms));
  require_shape(ml->val, {8, 48, 48, 1}, "refine output");
  for (long i = 0; i < ml->val.size(); ++i) {
    EXPECT_GE(ml->val[i], 0.0);
    EXPECT_LE(ml->val[i], 1.0);
  }
  Tensor short_ms = random_clip(4, 48, 48, 1, 5);
  EXPECT_THROW(masknet::refine(g, P, cfg, g.constant(x), g.constant(short_ms)), DimensionError);
}

TEST(Refine, FramePermutationEquivariantWithoutPositionBias) {
  // Full temporal window and no positional handling: permuting the input
  // frames permutes the output masks the same way.
  ParamSet params(9);
  MaskNetConfig cfg = toy_cfg();
  cfg.window.use_position_bias = false;
  cfg.window.temporal_extent = 4;
  Tensor x = random_clip(4, 16, 16, 3, 6);
  Tensor ms = random_clip(4, 16, 16, 1, 7);
  std::vector<long> perm{2, 0, 3, 1};
  auto permute = [&](const Tensor& t) {
    Tensor out(t.shape());
    long stride = t.size() / t.dim(0);
    for (long i = 0; i < t.dim(0); ++i)
      std::copy(t.data() + perm[static_cast<size_t>(i)] * stride, t.data() + (perm[static_cast<size_t>(i)] + 1) * stride,
                out.data() + i * stride);
    return out;
  };
  Graph g1;
  Bound P1(g1, params, false);
  Tensor direct = masknet::refine(g1, P1, cfg, g1.constant(x), g1.constant(ms))->val;
  Graph g2;
  Bound P2(g2, params, false);
  Tensor permuted = masknet::refine(g2, P2, cfg, g2.constant(permute(x)), g2.constant(permute(ms)))->val;
  EXPECT_LT(max_abs_diff(permute(direct), permuted), 1e-5);
}

TEST(Binarize, ThresholdSemantics) {
  Tensor soft = Tensor::from({1, 1, 3, 1}, {0.7, 0.5, 0.0});
  Tensor hard = binarize(soft, 0.5);
  EXPECT_DOUBLE_EQ(hard[0], 1.0);  // strictly above
  EXPECT_DOUBLE_EQ(hard[1], 0.0);  // tie breaks down
  EXPECT_DOUBLE_EQ(hard[2], 0.0);
  Tensor zeros({2, 4, 4, 1});
  EXPECT_DOUBLE_EQ(binarize(zeros, 0.5).max_abs(), 0.0);
  EXPECT_THROW(binarize(soft, 0.0), ConfigError);
  EXPECT_THROW(binarize(soft, 1.0), ConfigError);
}

TEST(MaskNet, EndToEndGradientsThroughAttention) {
  ParamSet params(10);
  MaskNetConfig cfg = toy_cfg();
  cfg.window.temporal_extent = 2;
  Tensor x = random_clip(2, 16, 16, 3, 8);
  Tensor gt = binarize(random_clip(2, 16, 16, 1, 9), 0.5);
  auto build = [&](Graph& g, Bound& P) {
    auto [ms, ml] = masknet::predict(g, P, cfg, g.constant(x));
    return ops::add(g, ops::bce_mean(g, ms, gt), ops::bce_mean(g, ml, gt));
  };
  // Warm up parameter creation, then check a subset of tensors.
  {
    Graph g;
    Bound P(g, params, false);
    build(g, P);
  }
  auto rep = testsupport::check_param_gradients(params, build, 1e-5, 2, 77);
  EXPECT_LT(rep.worst_rel, 1e-3) << "worst at " << rep.worst_param;
}
