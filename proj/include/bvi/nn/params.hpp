#pragma once

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "bvi/core/graph.hpp"
#include "bvi/core/rng.hpp"

namespace bvi {

enum class Init { kZero, kHeNormal, kXavierNormal };

// Named parameter tensors, created lazily on first use. Each tensor is
// initialized from an RNG seeded by (master seed, name hash), so creation
// order does not affect values. Entries keep registration order for
// serialization. Values are kept float32-representable (see round_to_f32) so
// checkpoints with f32 payloads round-trip bit-exactly.
class ParamSet {
 public:
  explicit ParamSet(uint64_t master_seed = 1) : master_seed_(master_seed) {}

  Tensor& get_or_create(const std::string& name, const std::vector<long>& shape, Init init, long fan_in = 0) {
    auto it = index_.find(name);
    if (it != index_.end()) {
      Tensor& t = items_[it->second].second;
      if (t.shape() != shape)
        throw DimensionError("param '" + name + "' shape mismatch: have " + Tensor::shape_str(t.shape()) +
                             ", requested " + Tensor::shape_str(shape));
      return t;
    }
    Tensor t(shape);
    if (init != Init::kZero) {
      Rng rng(master_seed_ ^ fnv1a64(name));
      double stddev;
      if (init == Init::kHeNormal)
        stddev = std::sqrt(2.0 / static_cast<double>(std::max<long>(fan_in, 1)));
      else
        stddev = std::sqrt(1.0 / static_cast<double>(std::max<long>(fan_in, 1)));
      for (long i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0, stddev);
    }
    round_to_f32(t);
    index_[name] = items_.size();
    items_.emplace_back(name, t);
    return items_.back().second;
  }

  // Creation-time fill for tensors whose initialization is not one of the
  // standard schemes (e.g. biased fusion logits).
  Tensor& get_or_create_custom(const std::string& name, const std::vector<long>& shape,
                               const std::function<void(Tensor&)>& fill) {
    auto it = index_.find(name);
    if (it != index_.end()) {
      Tensor& t = items_[it->second].second;
      if (t.shape() != shape)
        throw DimensionError("param '" + name + "' shape mismatch: have " + Tensor::shape_str(t.shape()) +
                             ", requested " + Tensor::shape_str(shape));
      return t;
    }
    Tensor t(shape);
    fill(t);
    round_to_f32(t);
    index_[name] = items_.size();
    items_.emplace_back(name, t);
    return items_.back().second;
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  Tensor& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return items_[it->second].second;
  }

  const Tensor& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return items_[it->second].second;
  }

  void set(const std::string& name, Tensor t) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      index_[name] = items_.size();
      items_.emplace_back(name, std::move(t));
    } else {
      items_[it->second].second = std::move(t);
    }
  }

  const std::deque<std::pair<std::string, Tensor>>& items() const { return items_; }
  std::deque<std::pair<std::string, Tensor>>& items() { return items_; }
  size_t size() const { return items_.size(); }
  uint64_t master_seed() const { return master_seed_; }

 private:
  uint64_t master_seed_;
  std::deque<std::pair<std::string, Tensor>> items_;
  std::unordered_map<std::string, size_t> index_;
};

// Per-graph view of a ParamSet: hands out leaf Vars that alias the parameter
// storage, one node per parameter per graph. With train=true the leaves
// require gradients and can be read back after Graph::backward.
class Bound {
 public:
  Bound(Graph& g, ParamSet& params, bool train) : g_(&g), params_(&params), train_(train) {}

  Var operator()(const std::string& name, const std::vector<long>& shape, Init init, long fan_in = 0) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    Tensor& t = params_->get_or_create(name, shape, init, fan_in);
    Var v = g_->leaf(t, train_);  // shares storage with the ParamSet entry
    cache_[name] = v;
    return v;
  }

  Var operator()(const std::string& name, const std::vector<long>& shape, const std::function<void(Tensor&)>& fill) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    Tensor& t = params_->get_or_create_custom(name, shape, fill);
    Var v = g_->leaf(t, train_);
    cache_[name] = v;
    return v;
  }

  // Gradient read-back for the optimizer; zero tensor if untouched.
  Tensor grad_of(const std::string& name) const {
    auto it = cache_.find(name);
    if (it == cache_.end() || it->second->grad.empty()) return Tensor::zeros(params_->at(name).shape());
    return it->second->grad;
  }

  bool training() const { return train_; }
  Graph& graph() { return *g_; }

 private:
  Graph* g_;
  ParamSet* params_;
  bool train_;
  std::unordered_map<std::string, Var> cache_;
};

}  // namespace bvi
