#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bvi/core/tensor.hpp"

namespace bvi {

// Token-level attention matrices over L tokens. Rows are softmax-normalized
// over valid keys only; columns of invalid (corrupted) keys are exactly zero.
// A query row with no valid keys is left all-zero and flagged degenerate; the
// caller applies its pass-through fallback.
struct AttentionResult {
  Tensor weights;                   // (L, L)
  std::vector<uint8_t> degenerate;  // per query row
  bool any_degenerate = false;
};

namespace detail {

inline AttentionResult masked_row_softmax(const Tensor& logits, const std::vector<uint8_t>& valid) {
  long L = logits.dim(0);
  AttentionResult r;
  r.weights = Tensor({L, L});
  r.degenerate.assign(static_cast<size_t>(L), 0);
  bool any_valid = false;
  for (uint8_t f : valid)
    if (f) {
      any_valid = true;
      break;
    }
  if (!any_valid) {
    r.degenerate.assign(static_cast<size_t>(L), 1);
    r.any_degenerate = true;
    return r;
  }
  for (long i = 0; i < L; ++i) {
    const double* lr = logits.data() + i * L;
    double* wr = r.weights.data() + i * L;
    double mx = -1e300;
    for (long j = 0; j < L; ++j)
      if (valid[static_cast<size_t>(j)]) mx = std::max(mx, lr[j]);
    double z = 0.0;
    for (long j = 0; j < L; ++j)
      if (valid[static_cast<size_t>(j)]) {
        wr[j] = std::exp(lr[j] - mx);
        z += wr[j];
      }
    for (long j = 0; j < L; ++j)
      if (valid[static_cast<size_t>(j)]) wr[j] /= z;
  }
  return r;
}

inline Tensor scaled_qk(const Tensor& q, const Tensor& k) {
  if (q.ndim() != 2 || !q.same_shape(k)) throw DimensionError("attention: Q and K must be (L,d)");
  long L = q.dim(0), d = q.dim(1);
  double inv = 1.0 / std::sqrt(static_cast<double>(d));
  Tensor out({L, L});
  for (long i = 0; i < L; ++i)
    for (long j = 0; j < L; ++j) {
      double acc = 0.0;
      const double* qi = q.data() + i * d;
      const double* kj = k.data() + j * d;
      for (long c = 0; c < d; ++c) acc += qi[c] * kj[c];
      out[i * L + j] = acc * inv;
    }
  return out;
}

inline void add_bias(Tensor& logits, const Tensor& bias) {
  if (bias.empty()) return;
  if (!bias.same_shape(logits)) throw DimensionError("attention: bias must match (L,L)");
  for (long i = 0; i < logits.size(); ++i) logits[i] += bias[i];
}

}  // namespace detail

// Dense self-attention: softmax over valid keys of (Q K^T / sqrt(d) + B).
inline AttentionResult dense_attention(const Tensor& q, const Tensor& k, const Tensor& bias,
                                       const std::vector<uint8_t>& valid) {
  Tensor logits = detail::scaled_qk(q, k);
  detail::add_bias(logits, bias);
  if (static_cast<long>(valid.size()) != q.dim(0)) throw DimensionError("attention: valid-key vector length");
  return detail::masked_row_softmax(logits, valid);
}

// Sparse self-attention: negative similarities are removed by ReLU before the
// bias is added, keeping only the strongest matches.
inline AttentionResult sparse_attention(const Tensor& q, const Tensor& k, const Tensor& bias,
                                        const std::vector<uint8_t>& valid) {
  Tensor logits = detail::scaled_qk(q, k);
  for (long i = 0; i < logits.size(); ++i) logits[i] = std::max(0.0, logits[i]);
  detail::add_bias(logits, bias);
  if (static_cast<long>(valid.size()) != q.dim(0)) throw DimensionError("attention: valid-key vector length");
  return detail::masked_row_softmax(logits, valid);
}

// Convex two-branch fusion: w1 * dense + w2 * sparse, applied identically to
// every value stream that consumes the result.
inline Tensor fuse_attention(const Tensor& a_dense, const Tensor& a_sparse, double w1, double w2) {
  if (!a_dense.same_shape(a_sparse)) throw DimensionError("fuse_attention: shape mismatch");
  Tensor out(a_dense.shape());
  for (long i = 0; i < out.size(); ++i) out[i] = w1 * a_dense[i] + w2 * a_sparse[i];
  return out;
}

// Relative-position bias lookup indices for an (T, gh, gw) token grid against
// a table of extent (2*bt-1, 2*bh-1, 2*bw-1); offsets outside the table are
// clamped to its edge. Returns L*L indices, row-major over (query, key).
inline std::shared_ptr<std::vector<long>> relative_bias_indices(long T, long gh, long gw, long bt, long bh, long bw) {
  long L = T * gh * gw;
  auto idx = std::make_shared<std::vector<long>>(static_cast<size_t>(L) * L);
  long q = 0;
  for (long ti = 0; ti < T; ++ti)
    for (long yi = 0; yi < gh; ++yi)
      for (long xi = 0; xi < gw; ++xi, ++q) {
        long kk = 0;
        long base = q * L;
        for (long tj = 0; tj < T; ++tj) {
          long dt = std::clamp(tj - ti, -(bt - 1), bt - 1) + bt - 1;
          for (long yj = 0; yj < gh; ++yj) {
            long dy = std::clamp(yj - yi, -(bh - 1), bh - 1) + bh - 1;
            for (long xj = 0; xj < gw; ++xj, ++kk) {
              long dx = std::clamp(xj - xi, -(bw - 1), bw - 1) + bw - 1;
              (*idx)[base + kk] = (dt * (2 * bh - 1) + dy) * (2 * bw - 1) + dx;
            }
          }
        }
      }
  return idx;
}

}  // namespace bvi
