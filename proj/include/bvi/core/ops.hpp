#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bvi/core/graph.hpp"

namespace bvi {
namespace ops {

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

inline Var add(Graph& g, const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw DimensionError("add: shape mismatch");
  Tensor out = a->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] += b->val[i];
  return g.make(std::move(out), {a, b}, [](Node& n) {
    accum(n.parents[0], n.grad);
    accum(n.parents[1], n.grad);
  });
}

inline Var sub(Graph& g, const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw DimensionError("sub: shape mismatch");
  Tensor out = a->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] -= b->val[i];
  return g.make(std::move(out), {a, b}, [](Node& n) {
    accum(n.parents[0], n.grad);
    const Var& b = n.parents[1];
    if (!b->requires_grad) return;
    Tensor& gb = grad_buf(b);
    for (long i = 0; i < gb.size(); ++i) gb[i] -= n.grad[i];
  });
}

inline Var mul(Graph& g, const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw DimensionError("mul: shape mismatch");
  Tensor out = a->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] *= b->val[i];
  return g.make(std::move(out), {a, b}, [](Node& n) {
    const Var& a = n.parents[0];
    const Var& b = n.parents[1];
    if (a->requires_grad) {
      Tensor& ga = grad_buf(a);
      for (long i = 0; i < ga.size(); ++i) ga[i] += b->val[i] * n.grad[i];
    }
    if (b->requires_grad) {
      Tensor& gb = grad_buf(b);
      for (long i = 0; i < gb.size(); ++i) gb[i] += a->val[i] * n.grad[i];
    }
  });
}

inline Var smul(Graph& g, const Var& a, double c) {
  Tensor out = a->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] *= c;
  return g.make(std::move(out), {a}, [c](Node& n) {
    const Var& a = n.parents[0];
    if (!a->requires_grad) return;
    Tensor& ga = grad_buf(a);
    for (long i = 0; i < ga.size(); ++i) ga[i] += c * n.grad[i];
  });
}

inline Var sadd(Graph& g, const Var& a, double c) {
  Tensor out = a->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] += c;
  return g.make(std::move(out), {a}, [](Node& n) { accum(n.parents[0], n.grad); });
}

// 1 - x, for mask complements.
inline Var one_minus(Graph& g, const Var& a) { return sadd(g, smul(g, a, -1.0), 1.0); }

inline Var relu(Graph& g, const Var& a) {
  Tensor out = a->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]);
  return g.make(std::move(out), {a}, [](Node& n) {
    const Var& a = n.parents[0];
    if (!a->requires_grad) return;
    Tensor& ga = grad_buf(a);
    for (long i = 0; i < ga.size(); ++i)
      if (a->val[i] > 0.0) ga[i] += n.grad[i];
  });
}

inline Var sigmoid(Graph& g, const Var& a) {
  Tensor out(a->val.shape());
  for (long i = 0; i < out.size(); ++i) {
    double x = a->val[i];
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return g.make(out, {a}, [out](Node& n) {
    const Var& a = n.parents[0];
    if (!a->requires_grad) return;
    Tensor& ga = grad_buf(a);
    for (long i = 0; i < ga.size(); ++i) ga[i] += out[i] * (1.0 - out[i]) * n.grad[i];
  });
}

inline Var abs(Graph& g, const Var& a) {
  Tensor out = a->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] = std::fabs(out[i]);
  return g.make(std::move(out), {a}, [](Node& n) {
    const Var& a = n.parents[0];
    if (!a->requires_grad) return;
    Tensor& ga = grad_buf(a);
    for (long i = 0; i < ga.size(); ++i) {
      double x = a->val[i];
      if (x > 0.0)
        ga[i] += n.grad[i];
      else if (x < 0.0)
        ga[i] -= n.grad[i];
    }
  });
}

inline Var clamp01(Graph& g, const Var& a) {
  Tensor out = a->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], 0.0, 1.0);
  return g.make(std::move(out), {a}, [](Node& n) {
    const Var& a = n.parents[0];
    if (!a->requires_grad) return;
    Tensor& ga = grad_buf(a);
    for (long i = 0; i < ga.size(); ++i) {
      double x = a->val[i];
      if (x > 0.0 && x < 1.0) ga[i] += n.grad[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Broadcasting over the channel axis
// ---------------------------------------------------------------------------

// x: (..., C) plus per-channel bias (C).
inline Var add_bias(Graph& g, const Var& x, const Var& b) {
  long C = b->val.size();
  if (x->val.size() % C != 0) throw DimensionError("add_bias: channel mismatch");
  Tensor out = x->val.clone();
  long rows = out.size() / C;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < C; ++c) out[r * C + c] += b->val[c];
  return g.make(std::move(out), {x, b}, [C](Node& n) {
    accum(n.parents[0], n.grad);
    const Var& b = n.parents[1];
    if (!b->requires_grad) return;
    Tensor& gb = grad_buf(b);
    long rows = n.grad.size() / C;
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < C; ++c) gb[c] += n.grad[r * C + c];
  });
}

// x: (T,H,W,C) times gate (T,H,W,1), gate broadcast across channels.
inline Var mul_gate(Graph& g, const Var& x, const Var& gate) {
  const auto& xs = x->val.shape();
  const auto& gs = gate->val.shape();
  if (xs.size() != 4 || gs.size() != 4 || gs[3] != 1 || xs[0] != gs[0] || xs[1] != gs[1] || xs[2] != gs[2])
    throw DimensionError("mul_gate: expected (T,H,W,C) x (T,H,W,1)");
  long C = xs[3], P = x->val.size() / C;
  Tensor out = x->val.clone();
  for (long p = 0; p < P; ++p) {
    double m = gate->val[p];
    for (long c = 0; c < C; ++c) out[p * C + c] *= m;
  }
  return g.make(std::move(out), {x, gate}, [C, P](Node& n) {
    const Var& x = n.parents[0];
    const Var& gate = n.parents[1];
    if (x->requires_grad) {
      Tensor& gx = grad_buf(x);
      for (long p = 0; p < P; ++p) {
        double m = gate->val[p];
        for (long c = 0; c < C; ++c) gx[p * C + c] += m * n.grad[p * C + c];
      }
    }
    if (gate->requires_grad) {
      Tensor& gg = grad_buf(gate);
      for (long p = 0; p < P; ++p) {
        double s = 0.0;
        for (long c = 0; c < C; ++c) s += x->val[p * C + c] * n.grad[p * C + c];
        gg[p] += s;
      }
    }
  });
}

// Mean across the channel axis: (T,H,W,C) -> (T,H,W,1).
inline Var mean_c(Graph& g, const Var& x) {
  const auto& s = x->val.shape();
  if (s.size() != 4) throw DimensionError("mean_c: expected rank-4 input");
  long C = s[3], P = x->val.size() / C;
  Tensor out({s[0], s[1], s[2], 1});
  for (long p = 0; p < P; ++p) {
    double acc = 0.0;
    for (long c = 0; c < C; ++c) acc += x->val[p * C + c];
    out[p] = acc / static_cast<double>(C);
  }
  return g.make(std::move(out), {x}, [C, P](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    double inv = 1.0 / static_cast<double>(C);
    for (long p = 0; p < P; ++p) {
      double gv = n.grad[p] * inv;
      for (long c = 0; c < C; ++c) gx[p * C + c] += gv;
    }
  });
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

inline Var reshape(Graph& g, const Var& x, std::vector<long> shape) {
  Tensor out = x->val.clone().reshaped(std::move(shape));
  return g.make(std::move(out), {x}, [](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    for (long i = 0; i < gx.size(); ++i) gx[i] += n.grad[i];
  });
}

inline Var concat_c(Graph& g, const std::vector<Var>& xs) {
  if (xs.empty()) throw DimensionError("concat_c: no inputs");
  const auto& s0 = xs[0]->val.shape();
  long Ctot = 0;
  for (const auto& x : xs) {
    const auto& s = x->val.shape();
    if (s.size() != 4 || s[0] != s0[0] || s[1] != s0[1] || s[2] != s0[2])
      throw DimensionError("concat_c: incompatible shapes");
    Ctot += s[3];
  }
  long P = s0[0] * s0[1] * s0[2];
  Tensor out({s0[0], s0[1], s0[2], Ctot});
  std::vector<long> cs;
  long off = 0;
  for (const auto& x : xs) {
    long C = x->val.dim(3);
    cs.push_back(off);
    for (long p = 0; p < P; ++p)
      for (long c = 0; c < C; ++c) out[p * Ctot + off + c] = x->val[p * C + c];
    off += C;
  }
  return g.make(std::move(out), xs, [cs, Ctot, P](Node& n) {
    for (size_t k = 0; k < n.parents.size(); ++k) {
      const Var& x = n.parents[k];
      if (!x->requires_grad) continue;
      long C = x->val.dim(3), off = cs[k];
      Tensor& gx = grad_buf(x);
      for (long p = 0; p < P; ++p)
        for (long c = 0; c < C; ++c) gx[p * C + c] += n.grad[p * Ctot + off + c];
    }
  });
}

inline Var slice_c(Graph& g, const Var& x, long c0, long len) {
  const auto& s = x->val.shape();
  if (s.size() != 4 || c0 < 0 || c0 + len > s[3]) throw DimensionError("slice_c: bad range");
  long C = s[3], P = x->val.size() / C;
  Tensor out({s[0], s[1], s[2], len});
  for (long p = 0; p < P; ++p)
    for (long c = 0; c < len; ++c) out[p * len + c] = x->val[p * C + c0 + c];
  return g.make(std::move(out), {x}, [c0, len, C, P](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    for (long p = 0; p < P; ++p)
      for (long c = 0; c < len; ++c) gx[p * C + c0 + c] += n.grad[p * len + c];
  });
}

inline Var slice_cols(Graph& g, const Var& x, long c0, long len) {
  const auto& s = x->val.shape();
  if (s.size() != 2 || c0 < 0 || c0 + len > s[1]) throw DimensionError("slice_cols: bad range");
  long R = s[0], C = s[1];
  Tensor out({R, len});
  for (long r = 0; r < R; ++r)
    for (long c = 0; c < len; ++c) out[r * len + c] = x->val[r * C + c0 + c];
  return g.make(std::move(out), {x}, [c0, len, R, C](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    for (long r = 0; r < R; ++r)
      for (long c = 0; c < len; ++c) gx[r * C + c0 + c] += n.grad[r * len + c];
  });
}

inline Var concat_cols(Graph& g, const std::vector<Var>& xs) {
  if (xs.empty()) throw DimensionError("concat_cols: no inputs");
  long R = xs[0]->val.dim(0), Ctot = 0;
  for (const auto& x : xs) {
    if (x->val.ndim() != 2 || x->val.dim(0) != R) throw DimensionError("concat_cols: incompatible shapes");
    Ctot += x->val.dim(1);
  }
  Tensor out({R, Ctot});
  std::vector<long> cs;
  long off = 0;
  for (const auto& x : xs) {
    long C = x->val.dim(1);
    cs.push_back(off);
    for (long r = 0; r < R; ++r)
      for (long c = 0; c < C; ++c) out[r * Ctot + off + c] = x->val[r * C + c];
    off += C;
  }
  return g.make(std::move(out), xs, [cs, Ctot, R](Node& n) {
    for (size_t k = 0; k < n.parents.size(); ++k) {
      const Var& x = n.parents[k];
      if (!x->requires_grad) continue;
      long C = x->val.dim(1), off = cs[k];
      Tensor& gx = grad_buf(x);
      for (long r = 0; r < R; ++r)
        for (long c = 0; c < C; ++c) gx[r * C + c] += n.grad[r * Ctot + off + c];
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

inline Var sum(Graph& g, const Var& x) {
  Tensor out = Tensor::scalar(x->val.sum());
  return g.make(std::move(out), {x}, [](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    double gv = n.grad[0];
    for (long i = 0; i < gx.size(); ++i) gx[i] += gv;
  });
}

inline Var mean(Graph& g, const Var& x) { return smul(g, sum(g, x), 1.0 / static_cast<double>(x->val.size())); }

// ---------------------------------------------------------------------------
// Matrix products (row-major 2-d tensors)
// ---------------------------------------------------------------------------

namespace detail {
// c (n,m) += a (n,k) * b (k,m)
inline void gemm_nn(const double* a, const double* b, double* c, long n, long k, long m) {
  for (long i = 0; i < n; ++i) {
    const double* ar = a + i * k;
    double* cr = c + i * m;
    for (long p = 0; p < k; ++p) {
      double av = ar[p];
      const double* br = b + p * m;
      for (long j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}
// c (n,m) += a (n,k) * b^T, b is (m,k)
inline void gemm_nt(const double* a, const double* b, double* c, long n, long k, long m) {
  for (long i = 0; i < n; ++i) {
    const double* ar = a + i * k;
    double* cr = c + i * m;
    for (long j = 0; j < m; ++j) {
      const double* br = b + j * k;
      double acc = 0.0;
      for (long p = 0; p < k; ++p) acc += ar[p] * br[p];
      cr[j] += acc;
    }
  }
}
// c (k,m) += a^T * b, a is (n,k), b is (n,m)
inline void gemm_tn(const double* a, const double* b, double* c, long n, long k, long m) {
  for (long i = 0; i < n; ++i) {
    const double* ar = a + i * k;
    const double* br = b + i * m;
    for (long p = 0; p < k; ++p) {
      double av = ar[p];
      double* cr = c + p * m;
      for (long j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}
}  // namespace detail

inline Var matmul_nn(Graph& g, const Var& a, const Var& b) {
  const auto& sa = a->val.shape();
  const auto& sb = b->val.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) throw DimensionError("matmul_nn: shape mismatch");
  long n = sa[0], k = sa[1], m = sb[1];
  Tensor out({n, m});
  detail::gemm_nn(a->val.data(), b->val.data(), out.data(), n, k, m);
  return g.make(std::move(out), {a, b}, [n, k, m](Node& nd) {
    const Var& a = nd.parents[0];
    const Var& b = nd.parents[1];
    if (a->requires_grad) detail::gemm_nt(nd.grad.data(), b->val.data(), grad_buf(a).data(), n, m, k);
    if (b->requires_grad) detail::gemm_tn(a->val.data(), nd.grad.data(), grad_buf(b).data(), n, k, m);
  });
}

// a (n,k) * b^T with b (m,k); used for query-key logits.
inline Var matmul_nt(Graph& g, const Var& a, const Var& b) {
  const auto& sa = a->val.shape();
  const auto& sb = b->val.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[1]) throw DimensionError("matmul_nt: shape mismatch");
  long n = sa[0], k = sa[1], m = sb[0];
  Tensor out({n, m});
  detail::gemm_nt(a->val.data(), b->val.data(), out.data(), n, k, m);
  return g.make(std::move(out), {a, b}, [n, k, m](Node& nd) {
    const Var& a = nd.parents[0];
    const Var& b = nd.parents[1];
    if (a->requires_grad) detail::gemm_nn(nd.grad.data(), b->val.data(), grad_buf(a).data(), n, m, k);
    if (b->requires_grad) detail::gemm_tn(nd.grad.data(), a->val.data(), grad_buf(b).data(), n, m, k);
  });
}

// ---------------------------------------------------------------------------
// Softmax
// ---------------------------------------------------------------------------

// Row softmax over valid columns only. Invalid columns are exactly zero in the
// output. If no column is valid every row is zero (degenerate; caller decides
// the fallback). `valid` has one flag per column, shared by all rows.
inline Var row_softmax_masked(Graph& g, const Var& x, const std::vector<uint8_t>& valid) {
  const auto& s = x->val.shape();
  if (s.size() != 2 || static_cast<long>(valid.size()) != s[1])
    throw DimensionError("row_softmax_masked: shape mismatch");
  long n = s[0], m = s[1];
  bool any_valid = std::find(valid.begin(), valid.end(), uint8_t(1)) != valid.end();
  Tensor out({n, m});
  if (any_valid) {
    for (long i = 0; i < n; ++i) {
      const double* xr = x->val.data() + i * m;
      double* yr = out.data() + i * m;
      double mx = -1e300;
      for (long j = 0; j < m; ++j)
        if (valid[j]) mx = std::max(mx, xr[j]);
      double z = 0.0;
      for (long j = 0; j < m; ++j)
        if (valid[j]) {
          yr[j] = std::exp(xr[j] - mx);
          z += yr[j];
        }
      for (long j = 0; j < m; ++j)
        if (valid[j]) yr[j] /= z;
    }
  }
  return g.make(out, {x}, [out, valid, n, m](Node& nd) {
    const Var& x = nd.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    for (long i = 0; i < n; ++i) {
      const double* yr = out.data() + i * m;
      const double* dyr = nd.grad.data() + i * m;
      double dot = 0.0;
      for (long j = 0; j < m; ++j) dot += yr[j] * dyr[j];
      double* gr = gx.data() + i * m;
      for (long j = 0; j < m; ++j) gr[j] += yr[j] * (dyr[j] - dot);
    }
  });
}

// Softmax of a small vector (fusion weights).
inline Var softmax_vec(Graph& g, const Var& x) {
  long n = x->val.size();
  Tensor out(x->val.shape());
  double mx = -1e300;
  for (long i = 0; i < n; ++i) mx = std::max(mx, x->val[i]);
  double z = 0.0;
  for (long i = 0; i < n; ++i) {
    out[i] = std::exp(x->val[i] - mx);
    z += out[i];
  }
  for (long i = 0; i < n; ++i) out[i] /= z;
  return g.make(out, {x}, [out, n](Node& nd) {
    const Var& x = nd.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    double dot = 0.0;
    for (long i = 0; i < n; ++i) dot += out[i] * nd.grad[i];
    for (long i = 0; i < n; ++i) gx[i] += out[i] * (nd.grad[i] - dot);
  });
}

// x scaled by entry `idx` of a small parameter vector (fusion weight).
inline Var mul_svar(Graph& g, const Var& x, const Var& s, long idx) {
  double c = s->val[idx];
  Tensor out = x->val.clone();
  for (long i = 0; i < out.size(); ++i) out[i] *= c;
  return g.make(std::move(out), {x, s}, [c, idx](Node& n) {
    const Var& x = n.parents[0];
    const Var& s = n.parents[1];
    if (x->requires_grad) {
      Tensor& gx = grad_buf(x);
      for (long i = 0; i < gx.size(); ++i) gx[i] += c * n.grad[i];
    }
    if (s->requires_grad) {
      double acc = 0.0;
      for (long i = 0; i < n.grad.size(); ++i) acc += x->val[i] * n.grad[i];
      grad_buf(s)[idx] += acc;
    }
  });
}

// Rows of `x` replaced by rows of `v` where flag set (attention pass-through
// fallback for queries with no valid keys).
inline Var passthrough_rows(Graph& g, const Var& x, const Var& v, const std::vector<uint8_t>& flags) {
  const auto& s = x->val.shape();
  if (!x->val.same_shape(v->val) || s.size() != 2 || static_cast<long>(flags.size()) != s[0])
    throw DimensionError("passthrough_rows: shape mismatch");
  long n = s[0], m = s[1];
  Tensor out = x->val.clone();
  for (long i = 0; i < n; ++i)
    if (flags[i])
      for (long j = 0; j < m; ++j) out[i * m + j] = v->val[i * m + j];
  return g.make(std::move(out), {x, v}, [flags, n, m](Node& nd) {
    const Var& x = nd.parents[0];
    const Var& v = nd.parents[1];
    if (x->requires_grad) {
      Tensor& gx = grad_buf(x);
      for (long i = 0; i < n; ++i)
        if (!flags[i])
          for (long j = 0; j < m; ++j) gx[i * m + j] += nd.grad[i * m + j];
    }
    if (v->requires_grad) {
      Tensor& gv = grad_buf(v);
      for (long i = 0; i < n; ++i)
        if (flags[i])
          for (long j = 0; j < m; ++j) gv[i * m + j] += nd.grad[i * m + j];
    }
  });
}

// out[i] = table[idx[i]]; scatter-add on the way back. Used to expand a
// relative-position bias table to a full attention matrix.
inline Var gather(Graph& g, const Var& table, std::shared_ptr<std::vector<long>> idx, std::vector<long> out_shape) {
  Tensor out(std::move(out_shape));
  if (out.size() != static_cast<long>(idx->size())) throw DimensionError("gather: index count mismatch");
  for (long i = 0; i < out.size(); ++i) out[i] = table->val[(*idx)[i]];
  return g.make(std::move(out), {table}, [idx](Node& n) {
    const Var& t = n.parents[0];
    if (!t->requires_grad) return;
    Tensor& gt = grad_buf(t);
    for (long i = 0; i < n.grad.size(); ++i) gt[(*idx)[i]] += n.grad[i];
  });
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

// Mean binary cross-entropy against a constant target, log arguments clamped
// to [eps, 1-eps]. Gradient is zero wherever the clamp is active.
inline Var bce_mean(Graph& g, const Var& pred, const Tensor& target, double eps = 1e-7) {
  if (!pred->val.same_shape(target)) throw DimensionError("bce_mean: shape mismatch");
  long nels = pred->val.size();
  for (long i = 0; i < nels; ++i) {
    double p = pred->val[i], t = target[i];
    if (p < -1e-9 || p > 1.0 + 1e-9 || t < -1e-9 || t > 1.0 + 1e-9)
      throw ValidationError("bce_mean: values must lie in [0,1]");
  }
  double acc = 0.0;
  for (long i = 0; i < nels; ++i) {
    double p = std::clamp(pred->val[i], eps, 1.0 - eps);
    double t = target[i];
    acc += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
  }
  Tensor out = Tensor::scalar(acc / static_cast<double>(nels));
  return g.make(std::move(out), {pred}, [target, eps, nels](Node& n) {
    const Var& pred = n.parents[0];
    if (!pred->requires_grad) return;
    Tensor& gp = grad_buf(pred);
    double scale = n.grad[0] / static_cast<double>(nels);
    for (long i = 0; i < nels; ++i) {
      double p = pred->val[i];
      if (p <= eps || p >= 1.0 - eps) continue;
      gp[i] += scale * (p - target[i]) / (p * (1.0 - p));
    }
  });
}

// Sum of |x| restricted by a constant 0/1 weight tensor, divided by `denom`.
inline Var weighted_abs_sum(Graph& g, const Var& x, const Tensor& w, double denom) {
  if (!x->val.same_shape(w)) throw DimensionError("weighted_abs_sum: shape mismatch");
  double acc = 0.0;
  for (long i = 0; i < x->val.size(); ++i) acc += w[i] * std::fabs(x->val[i]);
  Tensor out = Tensor::scalar(acc / denom);
  return g.make(std::move(out), {x}, [w, denom](Node& n) {
    const Var& x = n.parents[0];
    if (!x->requires_grad) return;
    Tensor& gx = grad_buf(x);
    double s = n.grad[0] / denom;
    for (long i = 0; i < gx.size(); ++i) {
      double v = x->val[i];
      if (v > 0.0)
        gx[i] += s * w[i];
      else if (v < 0.0)
        gx[i] -= s * w[i];
    }
  });
}

}  // namespace ops
}  // namespace bvi
