#pragma once

#include <algorithm>

#include "bvi/core/ops.hpp"

namespace bvi {
namespace ops {

// 2-d convolution over (T,H,W,C) with T as the batch axis.
// weight: (KH,KW,Cin,Cout), bias: (Cout). Zero padding.
inline Var conv2d(Graph& g, const Var& x, const Var& w, const Var& b, long stride = 1, long pad = -1) {
  const auto& xs = x->val.shape();
  const auto& ws = w->val.shape();
  if (xs.size() != 4 || ws.size() != 4) throw DimensionError("conv2d: rank mismatch");
  long T = xs[0], H = xs[1], W = xs[2], Cin = xs[3];
  long KH = ws[0], KW = ws[1], Cout = ws[3];
  if (ws[2] != Cin) throw DimensionError("conv2d: input channels do not match weight");
  if (b->val.size() != Cout) throw DimensionError("conv2d: bias size mismatch");
  if (pad < 0) pad = (KH - 1) / 2;
  long OH = (H + 2 * pad - KH) / stride + 1;
  long OW = (W + 2 * pad - KW) / stride + 1;
  if (OH <= 0 || OW <= 0) throw DimensionError("conv2d: output would be empty");

  Tensor out({T, OH, OW, Cout});
  {
    const double* xd = x->val.data();
    const double* wd = w->val.data();
    const double* bd = b->val.data();
    double* od = out.data();
    for (long t = 0; t < T; ++t)
      for (long oy = 0; oy < OH; ++oy)
        for (long ox = 0; ox < OW; ++ox) {
          double* orow = od + ((t * OH + oy) * OW + ox) * Cout;
          for (long co = 0; co < Cout; ++co) orow[co] = bd[co];
          for (long ky = 0; ky < KH; ++ky) {
            long iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= H) continue;
            for (long kx = 0; kx < KW; ++kx) {
              long ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= W) continue;
              const double* xrow = xd + ((t * H + iy) * W + ix) * Cin;
              const double* wrow = wd + (ky * KW + kx) * Cin * Cout;
              for (long ci = 0; ci < Cin; ++ci) {
                double xv = xrow[ci];
                const double* wr = wrow + ci * Cout;
                for (long co = 0; co < Cout; ++co) orow[co] += xv * wr[co];
              }
            }
          }
        }
  }

  return g.make(std::move(out), {x, w, b},
                [T, H, W, Cin, KH, KW, Cout, OH, OW, stride, pad](Node& n) {
                  const Var& x = n.parents[0];
                  const Var& w = n.parents[1];
                  const Var& b = n.parents[2];
                  const double* gd = n.grad.data();
                  if (b->requires_grad) {
                    Tensor& gb = grad_buf(b);
                    long P = T * OH * OW;
                    for (long p = 0; p < P; ++p)
                      for (long co = 0; co < Cout; ++co) gb[co] += gd[p * Cout + co];
                  }
                  const bool need_x = x->requires_grad;
                  const bool need_w = w->requires_grad;
                  if (!need_x && !need_w) return;
                  double* gxd = need_x ? grad_buf(x).data() : nullptr;
                  double* gwd = need_w ? grad_buf(w).data() : nullptr;
                  const double* xd = x->val.data();
                  const double* wd = w->val.data();
                  for (long t = 0; t < T; ++t)
                    for (long oy = 0; oy < OH; ++oy)
                      for (long ox = 0; ox < OW; ++ox) {
                        const double* grow = gd + ((t * OH + oy) * OW + ox) * Cout;
                        for (long ky = 0; ky < KH; ++ky) {
                          long iy = oy * stride + ky - pad;
                          if (iy < 0 || iy >= H) continue;
                          for (long kx = 0; kx < KW; ++kx) {
                            long ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= W) continue;
                            long xoff = ((t * H + iy) * W + ix) * Cin;
                            long woff = (ky * KW + kx) * Cin * Cout;
                            for (long ci = 0; ci < Cin; ++ci) {
                              const double* wr = wd + woff + ci * Cout;
                              double acc = 0.0;
                              if (need_x) {
                                for (long co = 0; co < Cout; ++co) acc += wr[co] * grow[co];
                                gxd[xoff + ci] += acc;
                              }
                              if (need_w) {
                                double xv = xd[xoff + ci];
                                double* gwr = gwd + woff + ci * Cout;
                                for (long co = 0; co < Cout; ++co) gwr[co] += xv * grow[co];
                              }
                            }
                          }
                        }
                      }
                });
}

// Nearest-neighbor 2x upsampling.
inline Var upsample2x(Graph& g, const Var& x) {
  const auto& s = x->val.shape();
  if (s.size() != 4) throw DimensionError("upsample2x: rank mismatch");
  long T = s[0], H = s[1], W = s[2], C = s[3];
  Tensor out({T, 2 * H, 2 * W, C});
  for (long t = 0; t < T; ++t)
    for (long y = 0; y < 2 * H; ++y)
      for (long x2 = 0; x2 < 2 * W; ++x2) {
        const double* src = x->val.data() + ((t * H + y / 2) * W + x2 / 2) * C;
        double* dst = out.data() + ((t * 2 * H + y) * 2 * W + x2) * C;
        std::copy(src, src + C, dst);
      }
  return g.make(std::move(out), {x}, [T, H, W, C](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    for (long t = 0; t < T; ++t)
      for (long y = 0; y < 2 * H; ++y)
        for (long x2 = 0; x2 < 2 * W; ++x2) {
          double* dst = gx.data() + ((t * H + y / 2) * W + x2 / 2) * C;
          const double* src = n.grad.data() + ((t * 2 * H + y) * 2 * W + x2) * C;
          for (long c = 0; c < C; ++c) dst[c] += src[c];
        }
  });
}

// Eager 2x2 average pooling (H, W even).
inline Tensor avgpool2x_plain(const Tensor& x) {
  const auto& s = x.shape();
  if (s.size() != 4) throw DimensionError("avgpool2x: rank mismatch");
  long T = s[0], H = s[1], W = s[2], C = s[3];
  if (H % 2 || W % 2) throw DimensionError("avgpool2x: H and W must be even");
  long OH = H / 2, OW = W / 2;
  Tensor out({T, OH, OW, C});
  for (long t = 0; t < T; ++t)
    for (long oy = 0; oy < OH; ++oy)
      for (long ox = 0; ox < OW; ++ox) {
        double* dst = out.data() + ((t * OH + oy) * OW + ox) * C;
        for (long dy = 0; dy < 2; ++dy) {
          const double* src = x.data() + ((t * H + 2 * oy + dy) * W + 2 * ox) * C;
          for (long c = 0; c < C; ++c) dst[c] += 0.25 * (src[c] + src[C + c]);
        }
      }
  return out;
}

// 2x2 average pooling (H, W even).
inline Var avgpool2x(Graph& g, const Var& x) {
  const auto& s = x->val.shape();
  if (s.size() != 4) throw DimensionError("avgpool2x: rank mismatch");
  long T = s[0], H = s[1], W = s[2], C = s[3];
  if (H % 2 || W % 2) throw DimensionError("avgpool2x: H and W must be even");
  long OH = H / 2, OW = W / 2;
  Tensor out({T, OH, OW, C});
  for (long t = 0; t < T; ++t)
    for (long oy = 0; oy < OH; ++oy)
      for (long ox = 0; ox < OW; ++ox) {
        double* dst = out.data() + ((t * OH + oy) * OW + ox) * C;
        for (long dy = 0; dy < 2; ++dy) {
          const double* src = x->val.data() + ((t * H + 2 * oy + dy) * W + 2 * ox) * C;
          for (long c = 0; c < C; ++c) dst[c] += 0.25 * (src[c] + src[C + c]);
        }
      }
  return g.make(std::move(out), {x}, [T, H, W, C, OH, OW](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    for (long t = 0; t < T; ++t)
      for (long oy = 0; oy < OH; ++oy)
        for (long ox = 0; ox < OW; ++ox) {
          const double* src = n.grad.data() + ((t * OH + oy) * OW + ox) * C;
          for (long dy = 0; dy < 2; ++dy) {
            double* dst = gx.data() + ((t * H + 2 * oy + dy) * W + 2 * ox) * C;
            for (long c = 0; c < C; ++c) {
              dst[c] += 0.25 * src[c];
              dst[C + c] += 0.25 * src[c];
            }
          }
        }
  });
}

}  // namespace ops
}  // namespace bvi
