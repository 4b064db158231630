#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mvcnn/array.hpp"
#include "mvcnn/rng.hpp"

namespace mvcnn {

/// Element-wise tanh.
inline Array tanh_map(const Array& x) {
  check_finite(x, "tanh_map");
  Array y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

// d/dx tanh = 1 - tanh(x)^2, expressed through the forward output.
inline Array tanh_backward(const Array& y, const Array& upstream) {
  check_same_shape(y, upstream, "tanh_backward");
  Array dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    dx[i] = upstream[i] * (real(1) - y[i] * y[i]);
  return dx;
}

/// W x + b for W of shape m x n, x of length n, b of length m.
inline Array affine(const Array& w, const Array& x, const Array& b) {
  check(w.rank() == 2 && x.rank() == 1 && b.rank() == 1,
        "affine: expects matrix, vector, vector");
  check(w.cols() == x.size() && w.rows() == b.size(),
        "affine: shape mismatch");
  Array y({w.rows()});
  for (std::size_t r = 0; r < w.rows(); ++r) {
    real acc = b[r];
    const real* wr = w.data() + r * w.cols();
    for (std::size_t c = 0; c < w.cols(); ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
  return y;
}

struct AffineGrads {
  Array dw;
  Array dx;
  Array db;
};

inline AffineGrads affine_backward(const Array& w, const Array& x,
                                   const Array& upstream) {
  check(upstream.rank() == 1 && upstream.size() == w.rows(),
        "affine_backward: upstream shape mismatch");
  AffineGrads g{Array(w.shape()), Array(x.shape()), Array(upstream.shape())};
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const real u = upstream[r];
    g.db[r] = u;
    real* dwr = g.dw.data() + r * w.cols();
    const real* wr = w.data() + r * w.cols();
    for (std::size_t c = 0; c < w.cols(); ++c) {
      dwr[c] = u * x[c];
      g.dx[c] += u * wr[c];
    }
  }
  return g;
}

struct SoftmaxXent {
  real loss = 0;
  Array probs;
};

/// Numerically stable softmax + cross-entropy against a single true class.
inline SoftmaxXent softmax_cross_entropy(const Array& logits,
                                         std::size_t label) {
  check(logits.rank() == 1 && logits.size() >= 1, "softmax: needs a vector");
  check(label < logits.size(), "softmax: label out of range");
  check_finite(logits, "softmax");
  real mx = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
  Array probs(logits.shape());
  real z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    z += probs[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) probs[i] /= z;
  real loss = -(logits[label] - mx - std::log(z));
  return {loss, std::move(probs)};
}

inline Array softmax(const Array& logits) {
  return softmax_cross_entropy(logits, 0).probs;
}

// Gradient of the loss w.r.t. the logits: probs - onehot(label).
inline Array softmax_cross_entropy_backward(const Array& probs,
                                            std::size_t label,
                                            real upstream = real(1)) {
  check(label < probs.size(), "softmax backward: label out of range");
  Array d(probs.shape());
  for (std::size_t i = 0; i < probs.size(); ++i) d[i] = upstream * probs[i];
  d[label] -= upstream;
  return d;
}

/// Inverted-dropout mask: entries are 1/keep_prob with probability keep_prob,
/// else 0. At evaluation time use ones_mask instead.
inline Array dropout_mask(const std::vector<std::size_t>& shape,
                          real keep_prob, Rng& rng) {
  check(keep_prob > real(0) && keep_prob <= real(1),
        "dropout_mask: keep_prob must be in (0, 1]");
  Array mask(shape);
  const real scale = real(1) / keep_prob;
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = rng.uniform() < keep_prob ? scale : real(0);
  return mask;
}

inline Array ones_mask(const std::vector<std::size_t>& shape) {
  Array mask(shape);
  mask.fill(real(1));
  return mask;
}

/// One differentiable operation: a forward map on arrays plus the matching
/// backward rule and a generator for admissible random inputs. The registry
/// is what the gradient-check property tests iterate over.
struct OpRule {
  std::string name;
  std::function<std::vector<Array>(Rng&)> make_inputs;
  std::function<Array(const std::vector<Array>&)> forward;
  std::function<std::vector<Array>(const std::vector<Array>& inputs,
                                   const Array& output, const Array& upstream)>
      backward;
};

namespace detail {
inline Array random_array(std::vector<std::size_t> shape, Rng& rng,
                          real lo = real(-2), real hi = real(2)) {
  Array a(std::move(shape));
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = static_cast<real>(rng.uniform(lo, hi));
  return a;
}
}  // namespace detail

/// Rules for the core dense ops. Network-level rules (wide convolution,
/// k-max pooling) are registered in network.hpp.
inline std::vector<OpRule> standard_op_rules() {
  std::vector<OpRule> rules;

  rules.push_back(OpRule{
      "tanh_map",
      [](Rng& rng) {
        const std::size_t n = 1 + rng.below(8);
        return std::vector<Array>{detail::random_array({n}, rng)};
      },
      [](const std::vector<Array>& in) { return tanh_map(in[0]); },
      [](const std::vector<Array>&, const Array& out, const Array& up) {
        return std::vector<Array>{tanh_backward(out, up)};
      }});

  rules.push_back(OpRule{
      "affine",
      [](Rng& rng) {
        const std::size_t m = 1 + rng.below(6);
        const std::size_t n = 1 + rng.below(6);
        return std::vector<Array>{detail::random_array({m, n}, rng),
                                  detail::random_array({n}, rng),
                                  detail::random_array({m}, rng)};
      },
      [](const std::vector<Array>& in) { return affine(in[0], in[1], in[2]); },
      [](const std::vector<Array>& in, const Array&, const Array& up) {
        AffineGrads g = affine_backward(in[0], in[1], up);
        return std::vector<Array>{std::move(g.dw), std::move(g.dx),
                                  std::move(g.db)};
      }});

  return rules;
}

}  // namespace mvcnn
