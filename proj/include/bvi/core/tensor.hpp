#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bvi/errors.hpp"

namespace bvi {

// Dense row-major double tensor. Video data uses the (T, H, W, C) layout with
// C contiguous; masks are C=1, RGB clips C=3. Storage is shared between
// copies, so a Tensor behaves like a reference; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<long> shape) : shape_(std::move(shape)) {
    buf_ = std::make_shared<std::vector<double>>(count(shape_), 0.0);
  }

  static Tensor zeros(std::vector<long> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<long> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.begin(), t.end(), v);
    return t;
  }

  static Tensor scalar(double v) { return full({1}, v); }

  static Tensor from(std::vector<long> shape, std::vector<double> values) {
    if (count(shape) != static_cast<long>(values.size()))
      throw DimensionError("Tensor::from: value count does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.buf_ = std::make_shared<std::vector<double>>(std::move(values));
    return t;
  }

  bool empty() const { return !buf_; }
  long size() const { return buf_ ? static_cast<long>(buf_->size()) : 0; }
  const std::vector<long>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  long dim(int i) const { return shape_.at(static_cast<size_t>(i)); }

  double* data() { return buf_->data(); }
  const double* data() const { return buf_->data(); }
  double* begin() { return data(); }
  double* end() { return data() + size(); }
  const double* begin() const { return data(); }
  const double* end() const { return data() + size(); }

  double& operator[](long i) { return (*buf_)[static_cast<size_t>(i)]; }
  double operator[](long i) const { return (*buf_)[static_cast<size_t>(i)]; }

  // 4-d accessors for (T, H, W, C) data.
  double& at(long t, long y, long x, long c) { return (*buf_)[static_cast<size_t>(offset(t, y, x, c))]; }
  double at(long t, long y, long x, long c) const { return (*buf_)[static_cast<size_t>(offset(t, y, x, c))]; }

  long offset(long t, long y, long x, long c) const {
    return ((t * shape_[1] + y) * shape_[2] + x) * shape_[3] + c;
  }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.buf_ = std::make_shared<std::vector<double>>(*buf_);
    return t;
  }

  // Same storage, new shape (element count must match).
  Tensor reshaped(std::vector<long> shape) const {
    if (count(shape) != size()) throw DimensionError("reshaped: element count mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.buf_ = buf_;
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : *buf_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double sum() const { return std::accumulate(begin(), end(), 0.0); }

  double sum_squares() const {
    double s = 0.0;
    for (double v : *buf_) s += v * v;
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : *buf_) m = std::max(m, std::abs(v));
    return m;
  }

  static long count(const std::vector<long>& shape) {
    long n = 1;
    for (long d : shape) {
      if (d < 0) throw DimensionError("negative tensor dimension");
      n *= d;
    }
    return n;
  }

  static std::string shape_str(const std::vector<long>& shape) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
  }

 private:
  std::shared_ptr<std::vector<double>> buf_;
  std::vector<long> shape_;
};

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_diff: size mismatch");
  double m = 0.0;
  for (long i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline void require_shape(const Tensor& t, const std::vector<long>& shape, const char* what) {
  if (t.shape() != shape)
    throw DimensionError(std::string(what) + ": expected " + Tensor::shape_str(shape) + ", got " +
                         Tensor::shape_str(t.shape()));
}

inline void require_unit_range(const Tensor& t, const char* what) {
  for (long i = 0; i < t.size(); ++i)
    if (!(t[i] >= 0.0 && t[i] <= 1.0)) throw ValidationError(std::string(what) + ": values must lie in [0,1]");
}

// Round every entry to the nearest float32 value. Model parameters are kept
// float32-representable so checkpoint payloads (f32) round-trip bit-exactly.
inline void round_to_f32(Tensor& t) {
  for (long i = 0; i < t.size(); ++i) t[i] = static_cast<double>(static_cast<float>(t[i]));
}

}  // namespace bvi
