#pragma once

#include "bvi/core/conv.hpp"
#include "bvi/core/ops.hpp"
#include "bvi/mask/masknet.hpp"

namespace bvi {

struct LossWeights {
  double lambda_m = 3.0;
  double lambda_v = 5.0;
  double lambda_c = 0.02;
};

// Training-time smooth stand-in for hard binarization of a frame difference:
//   b(z) = clamp(kappa * (mean_c |z| - tau), 0, 1)
// Evaluation uses the hard threshold at tau.
struct SoftBinarizer {
  double tau = 2.0 / 255.0;
  double kappa = 50.0;
};

namespace losses {

// Binary cross-entropy of both mask stages against the ground truth.
inline Var mask_loss(Graph& g, const Var& m_short, const Var& m_long, const Tensor& m_gt) {
  return ops::add(g, ops::bce_mean(g, m_short, m_gt), ops::bce_mean(g, m_long, m_gt));
}

// L1 over corrupted pixels plus L1 over valid pixels, each normalized by its
// own pixel count. A region with no pixels contributes zero.
inline Var completion_loss(Graph& g, const Var& y_hat, const Tensor& y, const Tensor& m_gt) {
  if (!y_hat->val.same_shape(y)) throw DimensionError("completion_loss: clip shapes differ");
  const auto& s = y.shape();
  if (m_gt.ndim() != 4 || m_gt.dim(3) != 1 || m_gt.dim(0) != s[0] || m_gt.dim(1) != s[1] || m_gt.dim(2) != s[2])
    throw DimensionError("completion_loss: mask misaligned");
  long C = s[3], P = y.size() / C;
  Tensor hole_w(y.shape()), valid_w(y.shape());
  double hole_n = 0.0, valid_n = 0.0;
  for (long p = 0; p < P; ++p) {
    bool hole = m_gt[p] > 0.5;
    (hole ? hole_n : valid_n) += static_cast<double>(C);
    for (long c = 0; c < C; ++c) (hole ? hole_w : valid_w)[p * C + c] = 1.0;
  }
  Var diff = ops::sub(g, y_hat, g.constant(y));
  Var loss = g.constant(Tensor::scalar(0.0));
  if (hole_n > 0.0) loss = ops::add(g, loss, ops::weighted_abs_sum(g, diff, hole_w, hole_n));
  if (valid_n > 0.0) loss = ops::add(g, loss, ops::weighted_abs_sum(g, diff, valid_w, valid_n));
  return loss;
}

// Smooth binarized difference b(y_hat - x): (T,H,W,1).
inline Var soft_difference_mask(Graph& g, const Var& y_hat, const Var& x, const SoftBinarizer& bin) {
  Var d = ops::mean_c(g, ops::abs(g, ops::sub(g, y_hat, x)));
  return ops::clamp01(g, ops::smul(g, ops::sadd(g, d, -bin.tau), bin.kappa));
}

// || m_long - b || + || m_gt - b ||, both L1 means; ties the predicted and
// true masks to where the completion actually changed the input.
inline Var consistency_loss(Graph& g, const Var& m_long, const Tensor& m_gt, const Var& y_hat, const Var& x,
                            const SoftBinarizer& bin) {
  Var b = soft_difference_mask(g, y_hat, x, bin);
  if (!m_long->val.same_shape(b->val) || !m_gt.same_shape(b->val))
    throw DimensionError("consistency_loss: mask shapes differ");
  Var t1 = ops::mean(g, ops::abs(g, ops::sub(g, m_long, b)));
  Var t2 = ops::mean(g, ops::abs(g, ops::sub(g, g.constant(m_gt), b)));
  return ops::add(g, t1, t2);
}

inline Var total_loss(Graph& g, const Var& l_m, const Var& l_v, const Var& l_c, const LossWeights& w) {
  if (w.lambda_m < 0 || w.lambda_v < 0 || w.lambda_c < 0) throw ConfigError("loss weights must be nonnegative");
  Var s = ops::add(g, ops::smul(g, l_m, w.lambda_m), ops::smul(g, l_v, w.lambda_v));
  s = ops::add(g, s, ops::smul(g, l_c, w.lambda_c));
  if (!std::isfinite(s->val[0])) throw TrainingAbort("total loss is not finite");
  return s;
}

// ---------------------------------------------------------------------------
// Eager wrappers
// ---------------------------------------------------------------------------

inline double mask_loss(const Tensor& m_short, const Tensor& m_long, const Tensor& m_gt) {
  Graph g;
  return mask_loss(g, g.constant(m_short), g.constant(m_long), m_gt)->val[0];
}

inline double completion_loss(const Tensor& y_hat, const Tensor& y, const Tensor& m_gt) {
  Graph g;
  return completion_loss(g, g.constant(y_hat), y, m_gt)->val[0];
}

inline double consistency_loss(const Tensor& m_long, const Tensor& m_gt, const Tensor& y_hat, const Tensor& x,
                               const SoftBinarizer& bin = {}) {
  Graph g;
  return consistency_loss(g, g.constant(m_long), m_gt, g.constant(y_hat), g.constant(x), bin)->val[0];
}

inline double total_loss(double l_m, double l_v, double l_c, const LossWeights& w) {
  if (w.lambda_m < 0 || w.lambda_v < 0 || w.lambda_c < 0) throw ConfigError("loss weights must be nonnegative");
  double t = w.lambda_m * l_m + w.lambda_v * l_v + w.lambda_c * l_c;
  if (!std::isfinite(t)) throw TrainingAbort("total loss is not finite");
  return t;
}

// Hard evaluation-time variant of the binarized difference.
inline Tensor hard_difference_mask(const Tensor& y_hat, const Tensor& x, double tau = 2.0 / 255.0) {
  if (!y_hat.same_shape(x)) throw DimensionError("hard_difference_mask: shape mismatch");
  long C = x.dim(3), P = x.size() / C;
  Tensor out({x.dim(0), x.dim(1), x.dim(2), 1});
  for (long p = 0; p < P; ++p) {
    double acc = 0.0;
    for (long c = 0; c < C; ++c) acc += std::fabs(y_hat[p * C + c] - x[p * C + c]);
    out[p] = (acc / static_cast<double>(C)) > tau ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace losses
}  // namespace bvi
