#pragma once

#include "bvi/mask/window_attention.hpp"
#include "bvi/nn/blocks.hpp"

namespace bvi {

// Mask prediction: a per-frame short-term head proposes soft corruption
// masks; a long-term refiner with windowed spatio-temporal attention enforces
// temporal consistency. Masks use 1 = corrupted, 0 = valid throughout.
struct MaskNetConfig {
  long base_channels = 8;
  long refine_blocks = 1;
  WindowAttentionConfig window{};
};

namespace masknet {

inline void check_clip_range(const Tensor& x, const char* what) { require_unit_range(x, what); }

// Short-term prediction, batched over frames: (T,H,W,3) -> soft (T,H,W,1).
// Per-frame by construction (no cross-frame operator is involved).
inline Var short_term(Graph& g, Bound& P, const MaskNetConfig& cfg, const Var& frames) {
  const auto& s = frames->val.shape();
  if (s.size() != 4 || s[3] != 3) throw DimensionError("short_term: expected (T,H,W,3)");
  auto feats = nn::encoder_backbone(g, P, frames, "stp.enc", 3, cfg.base_channels);
  Var logits = nn::decoder_backbone(g, P, feats, "stp.dec", cfg.base_channels, 1);
  return ops::sigmoid(g, logits);
}

// One attention block: project to q/k/v with 1x1 convolutions, run the
// grouped window attention, then gate the fused aggregation back onto E.
inline Var attention_block(Graph& g, Bound& P, const MaskNetConfig& cfg, const Var& E, const std::string& prefix) {
  long C = E->val.dim(3);
  Var q = nn::conv(g, P, E, prefix + ".q", C, C, 1);
  Var k = nn::conv(g, P, E, prefix + ".k", C, C, 1);
  Var v = nn::conv(g, P, E, prefix + ".v", C, C, 1);
  const auto& w = cfg.window;
  long span = 2 * w.spatial_radius + 1;
  Var bias = P(prefix + ".pos_bias", {w.groups, 2 * w.temporal_extent - 1, span, span}, Init::kZero);
  Var core = ops::windowed_st_attention_core(g, q, k, v, bias, w);
  Var D = ops::slice_c(g, core, 0, C);
  Var gate = ops::slice_c(g, core, C, 1);
  Var mixed = nn::conv(g, P, D, prefix + ".out", C, C, 1);
  return ops::add(g, E, ops::mul_gate(g, mixed, gate));
}

// Long-term refinement: encode (frame, soft mask) pairs, apply the attention
// blocks at the bottleneck, decode back to per-frame soft masks.
inline Var refine(Graph& g, Bound& P, const MaskNetConfig& cfg, const Var& frames, const Var& soft_masks) {
  const auto& fs = frames->val.shape();
  const auto& ms = soft_masks->val.shape();
  if (fs.size() != 4 || ms.size() != 4 || ms[3] != 1 || fs[0] != ms[0] || fs[1] != ms[1] || fs[2] != ms[2])
    throw DimensionError("refine: frames and masks must align in (T,H,W)");
  Var x = ops::concat_c(g, {frames, soft_masks});
  auto feats = nn::encoder_backbone(g, P, x, "ltr.enc", 4, cfg.base_channels);
  Var E = feats.bottleneck;
  for (long b = 0; b < cfg.refine_blocks; ++b) E = attention_block(g, P, cfg, E, "ltr.attn" + std::to_string(b));
  feats.bottleneck = E;
  Var logits = nn::decoder_backbone(g, P, feats, "ltr.dec", cfg.base_channels, 1);
  return ops::sigmoid(g, logits);
}

// Full mask prediction: short-term proposals refined over time.
inline std::pair<Var, Var> predict(Graph& g, Bound& P, const MaskNetConfig& cfg, const Var& frames) {
  Var ms = short_term(g, P, cfg, frames);
  Var ml = refine(g, P, cfg, frames, ms);
  return {ms, ml};
}

}  // namespace masknet

// Hard threshold: 1 where soft > tau, else 0 (ties break to 0).
inline Tensor binarize(const Tensor& soft, double tau = 0.5) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("binarize: tau must lie in (0,1)");
  masknet::check_clip_range(soft, "binarize");
  Tensor out(soft.shape());
  for (long i = 0; i < soft.size(); ++i) out[i] = soft[i] > tau ? 1.0 : 0.0;
  return out;
}

}  // namespace bvi
