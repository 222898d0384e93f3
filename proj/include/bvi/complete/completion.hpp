#pragma once

#include "bvi/complete/attention.hpp"
#include "bvi/nn/blocks.hpp"

namespace bvi {

// Video completion: encoder with two strided-conv downsamplings, a stack of
// wavelet attention blocks, and a mirrored decoder. The final frames are
// composited so valid pixels keep their input values.
struct CompletionConfig {
  long base_channels = 8;
  long blocks = 2;
  long heads = 2;
  long temporal_extent = 8;  // bias-table extent along dt
  long bias_grid_h = 6;      // token-grid extent the bias table is sized for
  long bias_grid_w = 6;
  bool sparse_branch = true;  // false: dense-attention-only ablation
};

namespace completion {

// A token is a usable key iff the mask pooled to the token grid is below 0.5.
inline std::vector<uint8_t> token_validity(const Tensor& token_mask) {
  std::vector<uint8_t> valid(static_cast<size_t>(token_mask.size()));
  for (long i = 0; i < token_mask.size(); ++i) valid[static_cast<size_t>(i)] = token_mask[i] < 0.5 ? 1 : 0;
  return valid;
}

// One wavelet attention block. Queries and keys come from the low-frequency
// subband only; the fused dense/sparse weights are shared by the low- and all
// three high-frequency value subbands. Corrupted keys are excluded before
// normalization, so rows stay stochastic. If no key is valid the whole grid
// is degenerate and value tokens pass through unchanged.
inline Var wavelet_attention_block(Graph& g, Bound& P, const CompletionConfig& cfg, const Var& F,
                                   const std::vector<uint8_t>& valid, const std::string& prefix) {
  const auto& s = F->val.shape();
  long T = s[0], h = s[1], w = s[2], C = s[3];
  if (h % 2 || w % 2) throw DimensionError("wavelet_attention_block: feature dims must be even");
  if (C % cfg.heads) throw ConfigError("wavelet_attention_block: heads must divide channels");
  long gh = h / 2, gw = w / 2, L = T * gh * gw, dh = C / cfg.heads;
  if (static_cast<long>(valid.size()) != L) throw DimensionError("wavelet_attention_block: validity size");

  Var q = nn::conv(g, P, F, prefix + ".q", C, C, 1);
  Var k = nn::conv(g, P, F, prefix + ".k", C, C, 1);
  Var v = nn::conv(g, P, F, prefix + ".v", C, C, 1);
  Var qs = ops::dwt2d_stacked(g, q);
  Var ks = ops::dwt2d_stacked(g, k);
  Var vs = ops::dwt2d_stacked(g, v);

  Var q_low = ops::reshape(g, ops::slice_c(g, qs, 0, C), {L, C});
  Var k_low = ops::reshape(g, ops::slice_c(g, ks, 0, C), {L, C});
  std::vector<Var> v_bands;
  for (long b = 0; b < 4; ++b) v_bands.push_back(ops::reshape(g, ops::slice_c(g, vs, b * C, C), {L, C}));

  bool all_invalid = true;
  for (uint8_t f : valid)
    if (f) {
      all_invalid = false;
      break;
    }
  std::vector<uint8_t> degenerate(static_cast<size_t>(L), all_invalid ? 1 : 0);

  long bt = cfg.temporal_extent, bh = cfg.bias_grid_h, bw = cfg.bias_grid_w;
  auto rel_idx = relative_bias_indices(T, gh, gw, bt, bh, bw);
  long table_len = (2 * bt - 1) * (2 * bh - 1) * (2 * bw - 1);
  Var bias_table = P(prefix + ".pos_bias", {cfg.heads * table_len}, Init::kZero);
  Var fusion_w;
  if (cfg.sparse_branch) fusion_w = ops::softmax_vec(g, P(prefix + ".fusion", {2}, Init::kZero));

  std::vector<std::vector<Var>> band_heads(4);
  for (long head = 0; head < cfg.heads; ++head) {
    Var qh = ops::slice_cols(g, q_low, head * dh, dh);
    Var kh = ops::slice_cols(g, k_low, head * dh, dh);
    Var scaled = ops::smul(g, ops::matmul_nt(g, qh, kh), 1.0 / std::sqrt(static_cast<double>(dh)));
    std::shared_ptr<std::vector<long>> head_idx = rel_idx;
    if (head > 0) {
      head_idx = std::make_shared<std::vector<long>>(*rel_idx);
      for (long& i : *head_idx) i += head * table_len;
    }
    Var bias = ops::gather(g, bias_table, head_idx, {L, L});
    Var attn = ops::row_softmax_masked(g, ops::add(g, scaled, bias), valid);
    if (cfg.sparse_branch) {
      Var a_sparse = ops::row_softmax_masked(g, ops::add(g, ops::relu(g, scaled), bias), valid);
      attn = ops::add(g, ops::mul_svar(g, attn, fusion_w, 0), ops::mul_svar(g, a_sparse, fusion_w, 1));
    }
    for (long b = 0; b < 4; ++b) {
      Var vh = ops::slice_cols(g, v_bands[static_cast<size_t>(b)], head * dh, dh);
      Var outh = ops::matmul_nn(g, attn, vh);
      if (all_invalid) outh = ops::passthrough_rows(g, outh, vh, degenerate);
      band_heads[static_cast<size_t>(b)].push_back(outh);
    }
  }

  std::vector<Var> completed;
  for (long b = 0; b < 4; ++b)
    completed.push_back(ops::reshape(g, ops::concat_cols(g, band_heads[static_cast<size_t>(b)]), {T, gh, gw, C}));
  Var stacked = ops::concat_c(g, completed);
  Var vhat = ops::idwt2d_stacked(g, stacked);

  Var F1 = ops::add(g, F, nn::conv(g, P, vhat, prefix + ".proj", C, C, 1));
  Var ff = nn::conv(g, P, F1, prefix + ".ff1", C, 2 * C, 1);
  ff = ops::relu(g, ff);
  ff = nn::conv(g, P, ff, prefix + ".ff2", 2 * C, C, 1);
  return ops::add(g, F1, ff);
}

// Convenience overload: mask given at F's resolution, pooled to the token
// grid and thresholded internally.
inline Var wavelet_attention_block(Graph& g, Bound& P, const CompletionConfig& cfg, const Var& F,
                                   const Tensor& mask_at_feature_res, const std::string& prefix) {
  const auto& fs = F->val.shape();
  if (mask_at_feature_res.ndim() != 4 || mask_at_feature_res.dim(3) != 1 || mask_at_feature_res.dim(0) != fs[0] ||
      mask_at_feature_res.dim(1) != fs[1] || mask_at_feature_res.dim(2) != fs[2])
    throw DimensionError("wavelet_attention_block: mask must be (T,h,w,1) aligned with F");
  return wavelet_attention_block(g, P, cfg, F, token_validity(ops::avgpool2x_plain(mask_at_feature_res)), prefix);
}

// Full completion pass: returns the composited output and the raw decoder
// output. X (T,H,W,3) in [0,1], M (T,H,W,1) soft or binary in [0,1].
// With M identically zero the composite returns X bit-exactly.
inline std::pair<Var, Var> forward(Graph& g, Bound& P, const CompletionConfig& cfg, const Var& X, const Var& M) {
  const auto& xs = X->val.shape();
  const auto& ms = M->val.shape();
  if (xs.size() != 4 || xs[3] != 3) throw DimensionError("completion: expected clip (T,H,W,3)");
  if (ms.size() != 4 || ms[3] != 1 || ms[0] != xs[0] || ms[1] != xs[1] || ms[2] != xs[2])
    throw DimensionError("completion: mask must be (T,H,W,1) aligned with the clip");
  if (xs[1] % 8 || xs[2] % 8) throw DimensionError("completion: H and W must be divisible by 8");
  long B = cfg.base_channels;

  Var x = ops::concat_c(g, {X, M});
  Var f = ops::relu(g, nn::conv(g, P, x, "vc.enc0", 4, B, 3));
  f = ops::relu(g, nn::conv(g, P, f, "vc.enc1", B, 2 * B, 3, 2));
  f = ops::relu(g, nn::conv(g, P, f, "vc.enc2", 2 * B, 4 * B, 3, 2));

  // Mask at the token grid (H/8): average-pooled, then thresholded.
  Tensor m8 = ops::avgpool2x_plain(ops::avgpool2x_plain(ops::avgpool2x_plain(M->val)));
  std::vector<uint8_t> valid = completion::token_validity(m8);

  for (long b = 0; b < cfg.blocks; ++b)
    f = completion::wavelet_attention_block(g, P, cfg, f, valid, "vc.block" + std::to_string(b));

  f = ops::relu(g, nn::conv(g, P, ops::upsample2x(g, f), "vc.dec1", 4 * B, 2 * B, 3));
  f = ops::relu(g, nn::conv(g, P, ops::upsample2x(g, f), "vc.dec0", 2 * B, B, 3));
  Var raw = ops::sigmoid(g, nn::conv(g, P, f, "vc.head", B, 3, 3, 1, Init::kZero));

  Var composite = ops::add(g, ops::mul_gate(g, X, ops::one_minus(g, M)), ops::mul_gate(g, raw, M));
  return {composite, raw};
}

}  // namespace completion
}  // namespace bvi
