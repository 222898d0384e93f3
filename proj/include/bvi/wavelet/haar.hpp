#pragma once

#include "bvi/core/ops.hpp"

namespace bvi {

// One level of the orthonormal 2-d Haar transform, applied independently per
// frame and channel on (T,H,W,C) tensors. With the 2x2 block [a,b; c,d]:
//   LL = (a+b+c+d)/2   LH = (a-b+c-d)/2
//   HL = (a+b-c-d)/2   HH = (a-b-c+d)/2
// The basis is orthonormal, so energy is conserved exactly and the adjoint of
// the analysis step equals the synthesis step.
struct Subbands {
  Tensor ll, lh, hl, hh;

  const std::vector<long>& shape() const { return ll.shape(); }

  double energy() const { return ll.sum_squares() + lh.sum_squares() + hl.sum_squares() + hh.sum_squares(); }
};

namespace detail {

// Forward analysis into a caller-provided (T,H/2,W/2,4C) block layout
// [LL | LH | HL | HH] along the channel axis.
inline void haar_analyze(const double* x, double* out, long T, long H, long W, long C) {
  long OH = H / 2, OW = W / 2;
  for (long t = 0; t < T; ++t)
    for (long oy = 0; oy < OH; ++oy)
      for (long ox = 0; ox < OW; ++ox) {
        const double* r0 = x + ((t * H + 2 * oy) * W + 2 * ox) * C;
        const double* r1 = x + ((t * H + 2 * oy + 1) * W + 2 * ox) * C;
        double* o = out + ((t * OH + oy) * OW + ox) * 4 * C;
        for (long c = 0; c < C; ++c) {
          double a = r0[c], b = r0[C + c], cc = r1[c], d = r1[C + c];
          o[c] = 0.5 * (a + b + cc + d);
          o[C + c] = 0.5 * (a - b + cc - d);
          o[2 * C + c] = 0.5 * (a + b - cc - d);
          o[3 * C + c] = 0.5 * (a - b - cc + d);
        }
      }
}

// Synthesis from the block layout back to (T,H,W,C); accumulates into x.
inline void haar_synthesize(const double* in, double* x, long T, long H, long W, long C) {
  long OH = H / 2, OW = W / 2;
  for (long t = 0; t < T; ++t)
    for (long oy = 0; oy < OH; ++oy)
      for (long ox = 0; ox < OW; ++ox) {
        double* r0 = x + ((t * H + 2 * oy) * W + 2 * ox) * C;
        double* r1 = x + ((t * H + 2 * oy + 1) * W + 2 * ox) * C;
        const double* o = in + ((t * OH + oy) * OW + ox) * 4 * C;
        for (long c = 0; c < C; ++c) {
          double ll = o[c], lh = o[C + c], hl = o[2 * C + c], hh = o[3 * C + c];
          r0[c] += 0.5 * (ll + lh + hl + hh);
          r0[C + c] += 0.5 * (ll - lh + hl - hh);
          r1[c] += 0.5 * (ll + lh - hl - hh);
          r1[C + c] += 0.5 * (ll - lh - hl + hh);
        }
      }
}

inline void check_dwt_input(const Tensor& x, const char* what) {
  if (x.ndim() != 4) throw DimensionError(std::string(what) + ": expected (T,H,W,C)");
  if (x.dim(1) % 2 || x.dim(2) % 2) throw DimensionError(std::string(what) + ": H and W must be even");
  if (!x.all_finite()) throw ValidationError(std::string(what) + ": non-finite input");
}

}  // namespace detail

// Analysis, block-stacked along channels: (T,H,W,C) -> (T,H/2,W/2,4C).
inline Tensor dwt2d_stacked(const Tensor& x) {
  detail::check_dwt_input(x, "dwt2d");
  long T = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  Tensor out({T, H / 2, W / 2, 4 * C});
  detail::haar_analyze(x.data(), out.data(), T, H, W, C);
  return out;
}

inline Subbands dwt2d(const Tensor& x) {
  Tensor stacked = dwt2d_stacked(x);
  long T = stacked.dim(0), OH = stacked.dim(1), OW = stacked.dim(2), C = stacked.dim(3) / 4;
  Subbands s{Tensor({T, OH, OW, C}), Tensor({T, OH, OW, C}), Tensor({T, OH, OW, C}), Tensor({T, OH, OW, C})};
  long P = T * OH * OW;
  for (long p = 0; p < P; ++p)
    for (long c = 0; c < C; ++c) {
      const double* o = stacked.data() + p * 4 * C;
      s.ll[p * C + c] = o[c];
      s.lh[p * C + c] = o[C + c];
      s.hl[p * C + c] = o[2 * C + c];
      s.hh[p * C + c] = o[3 * C + c];
    }
  return s;
}

inline Tensor idwt2d_stacked(const Tensor& stacked) {
  if (stacked.ndim() != 4 || stacked.dim(3) % 4) throw DimensionError("idwt2d: expected (T,H',W',4C)");
  long T = stacked.dim(0), OH = stacked.dim(1), OW = stacked.dim(2), C = stacked.dim(3) / 4;
  Tensor out({T, 2 * OH, 2 * OW, C});
  detail::haar_synthesize(stacked.data(), out.data(), T, 2 * OH, 2 * OW, C);
  return out;
}

inline Tensor idwt2d(const Subbands& s) {
  const auto& sh = s.ll.shape();
  if (sh.size() != 4) throw DimensionError("idwt2d: expected rank-4 subbands");
  if (!s.lh.same_shape(s.ll) || !s.hl.same_shape(s.ll) || !s.hh.same_shape(s.ll))
    throw DimensionError("idwt2d: subband shapes differ");
  long T = sh[0], OH = sh[1], OW = sh[2], C = sh[3];
  Tensor stacked({T, OH, OW, 4 * C});
  long P = T * OH * OW;
  for (long p = 0; p < P; ++p)
    for (long c = 0; c < C; ++c) {
      double* o = stacked.data() + p * 4 * C;
      o[c] = s.ll[p * C + c];
      o[C + c] = s.lh[p * C + c];
      o[2 * C + c] = s.hl[p * C + c];
      o[3 * C + c] = s.hh[p * C + c];
    }
  return idwt2d_stacked(stacked);
}

namespace ops {

// Autodiff analysis: orthonormality means the backward pass is the synthesis
// step applied to the subband gradients.
inline Var dwt2d_stacked(Graph& g, const Var& x) {
  Tensor out = bvi::dwt2d_stacked(x->val);
  const auto& s = x->val.shape();
  long T = s[0], H = s[1], W = s[2], C = s[3];
  return g.make(std::move(out), {x}, [T, H, W, C](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    bvi::detail::haar_synthesize(n.grad.data(), grad_buf(x).data(), T, H, W, C);
  });
}

// Autodiff synthesis from the stacked layout; backward is the analysis step.
inline Var idwt2d_stacked(Graph& g, const Var& stacked) {
  Tensor out = bvi::idwt2d_stacked(stacked->val);
  const auto& s = out.shape();
  long T = s[0], H = s[1], W = s[2], C = s[3];
  return g.make(std::move(out), {stacked}, [T, H, W, C](Node& n) {
    const Var& st = n.parents[0];
    if (!st->requires_grad) return;
    Tensor tmp({T, H / 2, W / 2, 4 * C});
    bvi::detail::haar_analyze(n.grad.data(), tmp.data(), T, H, W, C);
    accum(st, tmp);
  });
}

}  // namespace ops
}  // namespace bvi
