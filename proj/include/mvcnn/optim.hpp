#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mvcnn/array.hpp"

namespace mvcnn {

/// A trainable tensor: value, gradient and the AdaGrad accumulator, all of
/// one shape. The accumulator is element-wise nondecreasing over steps.
struct Parameter {
  std::string name;
  Array value;
  Array gradient;
  Array adagrad_accum;

  Parameter() = default;
  Parameter(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)),
        value(shape),
        gradient(shape),
        adagrad_accum(std::move(shape)) {}

  void zero_grad() { gradient.fill(real(0)); }
};

// accum += g^2;  value -= lr * g / (sqrt(accum) + eps);  gradient cleared.
// The paper-style rule has no eps; a small one is required on the first step.
inline void adagrad_step(Parameter& p, real lr, real eps = real(1e-6)) {
  check(p.value.same_shape(p.gradient) &&
            p.value.same_shape(p.adagrad_accum),
        "adagrad_step: parameter arrays disagree on shape");
  check(p.gradient.all_finite(),
        "adagrad_step: non-finite gradient in " + p.name);
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const real g = p.gradient[i];
    if (g == real(0)) continue;  // exact no-op, and keeps eps = 0 usable
    p.adagrad_accum[i] += g * g;
    p.value[i] -= lr * g / (std::sqrt(p.adagrad_accum[i]) + eps);
    p.gradient[i] = real(0);
  }
}

/// Adds (lambda/2) * sum ||w||^2 to the loss and lambda * w to each gradient.
/// Which parameters participate (e.g. whether embedding tables are included)
/// is the caller's choice.
inline real l2_regularize(const std::vector<Parameter*>& params, real lambda) {
  check(lambda >= real(0), "l2_regularize: lambda must be nonnegative");
  real term = 0;
  if (lambda == real(0)) return term;
  for (Parameter* p : params) {
    const Array& w = p->value;
    for (std::size_t i = 0; i < w.size(); ++i) {
      term += w[i] * w[i];
      p->gradient[i] += lambda * w[i];
    }
  }
  return real(0.5) * lambda * term;
}

}  // namespace mvcnn
