#pragma once

#include "bvi/pipeline/config.hpp"

namespace bvi {
namespace pipeline {

struct ModelOutput {
  Var m_short;  // (T,H,W,1) soft
  Var m_long;   // (T,H,W,1) soft
  Var y_hat;    // (T,H,W,3) composited
  Var raw;      // (T,H,W,3) decoder output before compositing
};

// Full blind pass on one clip: masks are predicted from X alone, then the
// completion network consumes X with the soft refined mask.
inline ModelOutput model_forward(Graph& g, Bound& P, const RunConfig& cfg, const Tensor& x) {
  ModelOutput out;
  Var xv = g.constant(x);
  MaskNetConfig mask_cfg = cfg.mask_config();
  auto [ms, ml] = masknet::predict(g, P, mask_cfg, xv);
  out.m_short = ms;
  out.m_long = ml;
  CompletionConfig comp_cfg = cfg.completion_config();
  auto [y_hat, raw] = completion::forward(g, P, comp_cfg, xv, ml);
  out.y_hat = y_hat;
  out.raw = raw;
  return out;
}

struct InpaintResult {
  Tensor y_hat;   // completed clip
  Tensor m_pred;  // binarized refined mask
  Tensor m_soft;  // soft refined mask
};

// Inference: no mask input exists, by construction of the interface.
inline InpaintResult blind_inpaint(ParamSet& params, const RunConfig& cfg, const Tensor& x) {
  if (x.ndim() != 4 || x.dim(3) != 3) throw DimensionError("blind_inpaint: expected (T,H,W,3)");
  if (x.dim(1) % 8 || x.dim(2) % 8) throw DimensionError("blind_inpaint: H and W must be divisible by 8");
  Graph g;
  Bound P(g, params, false);
  ModelOutput out = model_forward(g, P, cfg, x);
  return {out.y_hat->val, binarize(out.m_long->val, cfg.mask_threshold), out.m_long->val};
}

}  // namespace pipeline
}  // namespace bvi
