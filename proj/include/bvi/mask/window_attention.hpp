#pragma once

#include <memory>
#include <vector>

#include "bvi/core/ops.hpp"

namespace bvi {

struct WindowAttentionConfig {
  long groups = 4;          // N channel groups
  long spatial_radius = 3;  // keys within +/- radius around the query pixel
  long temporal_extent = 8; // sizes the relative-bias table along dt
  bool use_position_bias = true;
};

namespace detail {

// Window geometry shared by forward and backward: every frame, spatial
// neighborhood clamped at the borders (truncated, not shifted).
struct WindowDims {
  long T, H, W, C, gc, N, r;
  long positions() const { return T * H * W; }
  void spatial_range(long y, long x, long& y0, long& y1, long& x0, long& x1) const {
    y0 = std::max<long>(0, y - r);
    y1 = std::min<long>(H - 1, y + r);
    x0 = std::max<long>(0, x - r);
    x1 = std::min<long>(W - 1, x + r);
  }
};

}  // namespace detail

namespace ops {

// Grouped spatio-temporal window attention. For each query position and
// channel group: scaled-dot-product affinities over keys in the window
// (softmax-normalized), aggregation of the windowed values, and a
// soft-attention summary. Output layout is (T,H,W,C+1): the aggregated
// features D in the first C channels and the gate map G in the last channel.
// G at position p is the largest affinity p attains as a key, maximized
// across the N groups.
inline Var windowed_st_attention_core(Graph& g, const Var& q, const Var& k, const Var& v, const Var& bias,
                                      const WindowAttentionConfig& cfg) {
  const auto& s = q->val.shape();
  if (s.size() != 4 || !k->val.same_shape(q->val) || !v->val.same_shape(q->val))
    throw DimensionError("windowed_st_attention: q/k/v shapes differ");
  bvi::detail::WindowDims wd;
  wd.T = s[0];
  wd.H = s[1];
  wd.W = s[2];
  wd.C = s[3];
  wd.N = cfg.groups;
  wd.r = cfg.spatial_radius;
  if (wd.C % wd.N) throw ConfigError("windowed_st_attention: groups must divide the channel count");
  wd.gc = wd.C / wd.N;
  const long Tbias = cfg.temporal_extent;
  const long span = 2 * wd.r + 1;
  if (cfg.use_position_bias) {
    std::vector<long> want{wd.N, 2 * Tbias - 1, span, span};
    if (bias->val.shape() != want)
      throw DimensionError("windowed_st_attention: bias table must be " + Tensor::shape_str(want));
  }

  const long P = wd.positions();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(wd.gc));

  // Affinity storage: for each query u, N contiguous runs of its window size.
  auto offsets = std::make_shared<std::vector<long>>(static_cast<size_t>(P) + 1);
  {
    long acc = 0;
    long u = 0;
    for (long t = 0; t < wd.T; ++t)
      for (long y = 0; y < wd.H; ++y)
        for (long x = 0; x < wd.W; ++x, ++u) {
          (*offsets)[u] = acc;
          long y0, y1, x0, x1;
          wd.spatial_range(y, x, y0, y1, x0, x1);
          acc += wd.N * wd.T * (y1 - y0 + 1) * (x1 - x0 + 1);
        }
    (*offsets)[P] = acc;
  }
  auto affin = std::make_shared<std::vector<double>>(static_cast<size_t>(offsets->back()));
  auto gate_argmax = std::make_shared<std::vector<long>>(static_cast<size_t>(P), -1);

  Tensor out({wd.T, wd.H, wd.W, wd.C + 1});
  std::vector<double> logits;
  std::vector<double> gate_best(static_cast<size_t>(P), -1.0);

  const double* qd = q->val.data();
  const double* kd = k->val.data();
  const double* vd = v->val.data();
  const double* bd = cfg.use_position_bias ? bias->val.data() : nullptr;

  long u = 0;
  for (long t = 0; t < wd.T; ++t)
    for (long y = 0; y < wd.H; ++y)
      for (long x = 0; x < wd.W; ++x, ++u) {
        long y0, y1, x0, x1;
        wd.spatial_range(y, x, y0, y1, x0, x1);
        long wlen = wd.T * (y1 - y0 + 1) * (x1 - x0 + 1);
        logits.resize(static_cast<size_t>(wlen));
        double* orow = out.data() + u * (wd.C + 1);
        for (long n = 0; n < wd.N; ++n) {
          const double* qrow = qd + u * wd.C + n * wd.gc;
          double* arow = affin->data() + (*offsets)[u] + n * wlen;
          long sidx = 0;
          double mx = -1e300;
          for (long kt = 0; kt < wd.T; ++kt) {
            long dt = std::clamp<long>(kt - t, -(Tbias - 1), Tbias - 1);
            for (long ky = y0; ky <= y1; ++ky)
              for (long kx = x0; kx <= x1; ++kx, ++sidx) {
                long kp = (kt * wd.H + ky) * wd.W + kx;
                const double* krow = kd + kp * wd.C + n * wd.gc;
                double dot = 0.0;
                for (long c = 0; c < wd.gc; ++c) dot += qrow[c] * krow[c];
                double l = dot * inv_sqrt;
                if (bd)
                  l += bd[((n * (2 * Tbias - 1) + (dt + Tbias - 1)) * (2 * wd.r + 1) + (ky - y + wd.r)) * (2 * wd.r + 1) +
                          (kx - x + wd.r)];
                logits[static_cast<size_t>(sidx)] = l;
                mx = std::max(mx, l);
              }
          }
          double z = 0.0;
          for (long i = 0; i < wlen; ++i) {
            arow[i] = std::exp(logits[static_cast<size_t>(i)] - mx);
            z += arow[i];
          }
          for (long i = 0; i < wlen; ++i) arow[i] /= z;

          // Aggregate values and track the per-key affinity maxima for G.
          double* drow = orow + n * wd.gc;
          sidx = 0;
          for (long kt = 0; kt < wd.T; ++kt)
            for (long ky = y0; ky <= y1; ++ky)
              for (long kx = x0; kx <= x1; ++kx, ++sidx) {
                long kp = (kt * wd.H + ky) * wd.W + kx;
                double a = arow[sidx];
                const double* vrow = vd + kp * wd.C + n * wd.gc;
                for (long c = 0; c < wd.gc; ++c) drow[c] += a * vrow[c];
                if (a > gate_best[static_cast<size_t>(kp)]) {
                  gate_best[static_cast<size_t>(kp)] = a;
                  (*gate_argmax)[static_cast<size_t>(kp)] = (*offsets)[u] + n * wlen + sidx;
                }
              }
        }
      }
  for (long p = 0; p < P; ++p) out[p * (wd.C + 1) + wd.C] = gate_best[static_cast<size_t>(p)];

  const bool use_bias = cfg.use_position_bias;
  return g.make(std::move(out), {q, k, v, bias},
                [wd, Tbias, inv_sqrt, offsets, affin, gate_argmax, use_bias](Node& n) {
                  const Var& q = n.parents[0];
                  const Var& k = n.parents[1];
                  const Var& v = n.parents[2];
                  const Var& bias = n.parents[3];
                  const long P = wd.positions();
                  std::vector<double> dA;  // per (query, group) window run
                  const double* qd = q->val.data();
                  const double* kd = k->val.data();
                  const double* vd = v->val.data();
                  double* gq = q->requires_grad ? grad_buf(q).data() : nullptr;
                  double* gk = k->requires_grad ? grad_buf(k).data() : nullptr;
                  double* gv = v->requires_grad ? grad_buf(v).data() : nullptr;
                  double* gb = (use_bias && bias->requires_grad) ? grad_buf(bias).data() : nullptr;

                  // Scatter the gate gradient onto its argmax affinity entries.
                  std::vector<double> dAg(affin->size(), 0.0);
                  for (long p = 0; p < P; ++p) {
                    double ggate = n.grad[p * (wd.C + 1) + wd.C];
                    if (ggate != 0.0) dAg[static_cast<size_t>((*gate_argmax)[static_cast<size_t>(p)])] += ggate;
                  }

                  long u = 0;
                  for (long t = 0; t < wd.T; ++t)
                    for (long y = 0; y < wd.H; ++y)
                      for (long x = 0; x < wd.W; ++x, ++u) {
                        long y0, y1, x0, x1;
                        wd.spatial_range(y, x, y0, y1, x0, x1);
                        long wlen = wd.T * (y1 - y0 + 1) * (x1 - x0 + 1);
                        const double* gout = n.grad.data() + u * (wd.C + 1);
                        for (long ng = 0; ng < wd.N; ++ng) {
                          const double* arow = affin->data() + (*offsets)[u] + ng * wlen;
                          const double* dgate_row = dAg.data() + (*offsets)[u] + ng * wlen;
                          const double* gD = gout + ng * wd.gc;
                          dA.assign(static_cast<size_t>(wlen), 0.0);
                          long sidx = 0;
                          for (long kt = 0; kt < wd.T; ++kt)
                            for (long ky = y0; ky <= y1; ++ky)
                              for (long kx = x0; kx <= x1; ++kx, ++sidx) {
                                long kp = (kt * wd.H + ky) * wd.W + kx;
                                const double* vrow = vd + kp * wd.C + ng * wd.gc;
                                double acc = dgate_row[sidx];
                                for (long c = 0; c < wd.gc; ++c) acc += gD[c] * vrow[c];
                                dA[static_cast<size_t>(sidx)] = acc;
                                if (gv) {
                                  double a = arow[sidx];
                                  double* gvrow = gv + kp * wd.C + ng * wd.gc;
                                  for (long c = 0; c < wd.gc; ++c) gvrow[c] += a * gD[c];
                                }
                              }
                          // Softmax backward within the window.
                          double dot = 0.0;
                          for (long i = 0; i < wlen; ++i) dot += arow[i] * dA[static_cast<size_t>(i)];
                          const double* qrow = qd + u * wd.C + ng * wd.gc;
                          sidx = 0;
                          for (long kt = 0; kt < wd.T; ++kt) {
                            long dt = std::clamp<long>(kt - t, -(Tbias - 1), Tbias - 1);
                            for (long ky = y0; ky <= y1; ++ky)
                              for (long kx = x0; kx <= x1; ++kx, ++sidx) {
                                double dl = arow[sidx] * (dA[static_cast<size_t>(sidx)] - dot);
                                if (dl == 0.0) continue;
                                long kp = (kt * wd.H + ky) * wd.W + kx;
                                const double* krow = kd + kp * wd.C + ng * wd.gc;
                                if (gq) {
                                  double* gqrow = gq + u * wd.C + ng * wd.gc;
                                  for (long c = 0; c < wd.gc; ++c) gqrow[c] += dl * inv_sqrt * krow[c];
                                }
                                if (gk) {
                                  double* gkrow = gk + kp * wd.C + ng * wd.gc;
                                  for (long c = 0; c < wd.gc; ++c) gkrow[c] += dl * inv_sqrt * qrow[c];
                                }
                                if (gb)
                                  gb[((ng * (2 * Tbias - 1) + (dt + Tbias - 1)) * (2 * wd.r + 1) + (ky - y + wd.r)) *
                                         (2 * wd.r + 1) +
                                     (kx - x + wd.r)] += dl;
                              }
                          }
                        }
                      }
                });
}

}  // namespace ops
}  // namespace bvi
