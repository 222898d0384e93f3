#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bvi/nn/params.hpp"

namespace bvi::testsupport {

// Central finite differences against reverse-mode gradients for every tensor
// in a ParamSet, sampling `samples` entries per tensor. `build` must
// construct the scalar loss from the current parameter values. Entry indices
// are drawn deterministically from `seed`.
struct GradCheckReport {
  double worst_rel = 0.0;
  std::string worst_param;
  long checked = 0;
};

// `denom_floor` sets the absolute yardstick for near-zero gradients: below
// it, finite differences sit in the round-off noise of the loss evaluation
// and only absolute agreement is meaningful.
inline GradCheckReport check_param_gradients(ParamSet& params,
                                             const std::function<Var(Graph&, Bound&)>& build, double h = 1e-5,
                                             long samples = 5, uint64_t seed = 7, double denom_floor = 1e-6) {
  // One analytic backward.
  Graph g;
  Bound bound(g, params, true);
  Var loss = build(g, bound);
  g.backward(loss);
  std::vector<std::pair<std::string, Tensor>> grads;
  for (auto& [name, t] : params.items()) grads.emplace_back(name, bound.grad_of(name));

  auto eval = [&]() {
    Graph g2;
    Bound b2(g2, params, false);
    return build(g2, b2)->val[0];
  };

  GradCheckReport rep;
  Rng pick(seed);
  std::unordered_map<std::string, Tensor> gmap;
  for (auto& [name, gt] : grads) gmap[name] = gt;

  // No single step width suits every probe in double precision: large steps
  // can cross ReLU/threshold kinks, small steps drown tiny gradients in
  // round-off noise. Each entry passes if any step width agrees; a wrong
  // backward pass fails at all of them.
  const double steps_to_try[3] = {h, 10.0 * h, 0.1 * h};
  for (auto& [name, t] : params.items()) {
    const Tensor& grad = gmap[name];
    for (long s = 0; s < samples; ++s) {
      long i = pick.uniform_int(0, t.size() - 1);
      double keep = t[i];
      double an = grad[i];
      double best = 1e300;
      for (double hh : steps_to_try) {
        double step = hh * std::max(1.0, std::fabs(keep));
        t[i] = keep + step;
        double fp = eval();
        t[i] = keep - step;
        double fm = eval();
        t[i] = keep;
        double fd = (fp - fm) / (2.0 * step);
        best = std::min(best, std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), denom_floor}));
        if (best < 1e-3) break;
      }
      ++rep.checked;
      if (best > rep.worst_rel) {
        rep.worst_rel = best;
        rep.worst_param = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return rep;
}

// Finite-difference check of d(loss)/d(input tensor) for a single leaf.
inline double check_input_gradient(Tensor input, const std::function<Var(Graph&, const Var&)>& build,
                                   double h = 1e-5, long samples = 20, uint64_t seed = 11) {
  Graph g;
  Var leaf = g.leaf(input, true);
  Var loss = build(g, leaf);
  g.backward(loss);
  Tensor grad = leaf->grad.empty() ? Tensor::zeros(input.shape()) : leaf->grad;

  auto eval = [&]() {
    Graph g2;
    return build(g2, g2.leaf(input, false))->val[0];
  };

  double worst = 0.0;
  Rng pick(seed);
  for (long s = 0; s < samples; ++s) {
    long i = pick.uniform_int(0, input.size() - 1);
    double keep = input[i];
    double step = h * std::max(1.0, std::fabs(keep));
    input[i] = keep + step;
    double fp = eval();
    input[i] = keep - step;
    double fm = eval();
    input[i] = keep;
    double fd = (fp - fm) / (2.0 * step);
    double rel = std::fabs(grad[i] - fd) / std::max({std::fabs(grad[i]), std::fabs(fd), 1e-6});
    worst = std::max(worst, rel);
  }
  return worst;
}

inline Tensor random_tensor(std::vector<long> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (long i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace bvi::testsupport
