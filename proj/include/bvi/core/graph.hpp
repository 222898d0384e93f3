#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "bvi/core/tensor.hpp"

namespace bvi {

// Reverse-mode autodiff over a dynamically built tape. Nodes are appended in
// evaluation order, so the tape itself is a topological order; backward() is a
// single reverse sweep. Gradient buffers are allocated on first accumulation.
struct Node {
  Tensor val;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad, accumulates into parents' grads (via Graph::accum).
  std::function<void(Node&)> backward_fn;
};

using Var = std::shared_ptr<Node>;

inline Tensor& grad_buf(const Var& v) {
  if (v->grad.empty()) v->grad = Tensor::zeros(v->val.shape());
  return v->grad;
}

class Graph {
 public:
  Var leaf(Tensor t, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->val = std::move(t);
    n->requires_grad = requires_grad;
    tape_.push_back(n);
    return n;
  }

  Var constant(Tensor t) { return leaf(std::move(t), false); }

  Var make(Tensor val, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->val = std::move(val);
    for (auto& p : parents)
      if (p->requires_grad) {
        n->requires_grad = true;
        break;
      }
    if (n->requires_grad) {
      n->parents = std::move(parents);
      n->backward_fn = std::move(backward_fn);
    }
    tape_.push_back(n);
    return n;
  }

  // root must be scalar. Seeds d(root)/d(root) = 1 and sweeps the tape.
  void backward(const Var& root) {
    if (root->val.size() != 1) throw ValidationError("backward: root must be a scalar");
    grad_buf(root)[0] += 1.0;
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      Node& n = **it;
      if (n.requires_grad && n.backward_fn && !n.grad.empty()) n.backward_fn(n);
    }
  }

  size_t size() const { return tape_.size(); }

 private:
  std::vector<Var> tape_;
};

// Accumulate src into p's gradient if p participates in differentiation.
inline void accum(const Var& p, const Tensor& src) {
  if (!p->requires_grad) return;
  Tensor& g = grad_buf(p);
  const double* s = src.data();
  double* d = g.data();
  for (long i = 0; i < g.size(); ++i) d[i] += s[i];
}

}  // namespace bvi
