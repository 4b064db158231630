#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mvcnn {

#ifdef MVCNN_REAL_FLOAT
// Reduced-precision build for speed. Gradient-check tolerances assume the
// default 64-bit build; do not run the checker suite in this mode.
using real = float;
#else
using real = double;
#endif

inline void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
inline void check(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Dense row-major array of reals with an explicit shape.
class Array {
 public:
  Array() = default;

  explicit Array(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), values_(checked_count(shape_), real(0)) {}

  Array(std::vector<std::size_t> shape, std::vector<real> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    check(values_.size() == checked_count(shape_),
          "Array: value count does not match shape");
  }

  static Array from_vector(std::vector<real> v) {
    std::size_t n = v.size();
    return Array({n}, std::move(v));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return values_.size(); }

  real* data() { return values_.data(); }
  const real* data() const { return values_.data(); }
  std::vector<real>& values() { return values_; }
  const std::vector<real>& values() const { return values_; }

  real& operator[](std::size_t i) { return values_[i]; }
  real operator[](std::size_t i) const { return values_[i]; }

  std::size_t rows() const {
    check(rank() == 2, "Array: rows() needs a rank-2 array");
    return shape_[0];
  }
  std::size_t cols() const {
    check(rank() == 2, "Array: cols() needs a rank-2 array");
    return shape_[1];
  }
  real& operator()(std::size_t r, std::size_t c) {
    return values_[r * shape_[1] + c];
  }
  real operator()(std::size_t r, std::size_t c) const {
    return values_[r * shape_[1] + c];
  }

  bool same_shape(const Array& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (real v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(real v) {
    for (real& x : values_) x = v;
  }

 private:
  static std::size_t checked_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
      check(e > 0, "Array: shape extents must be positive");
      n *= e;
    }
    return n;
  }

  std::vector<std::size_t> shape_;
  std::vector<real> values_;
};

inline std::string shape_string(const Array& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (i) s += "x";
    s += std::to_string(a.shape()[i]);
  }
  return s + "]";
}

inline void check_same_shape(const Array& a, const Array& b, const char* who) {
  check(a.same_shape(b), std::string(who) + ": shape mismatch " +
                             shape_string(a) + " vs " + shape_string(b));
}

inline void check_finite(const Array& a, const char* who) {
  check(a.all_finite(), std::string(who) + ": non-finite values");
}

// y += s * x
inline void add_scaled(Array& y, const Array& x, real s) {
  check_same_shape(y, x, "add_scaled");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

inline real sum(const Array& a) {
  real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
  return s;
}

inline real dot(const Array& a, const Array& b) {
  check_same_shape(a, b, "dot");
  real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Array hadamard(const Array& a, const Array& b) {
  check_same_shape(a, b, "hadamard");
  Array out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace mvcnn
