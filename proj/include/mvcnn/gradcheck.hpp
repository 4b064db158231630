#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvcnn/optim.hpp"
#include "mvcnn/rng.hpp"

namespace mvcnn {

struct GradCheckOptions {
  real eps = real(1e-5);
  // 0 checks every coordinate; otherwise this many are sampled per parameter.
  std::size_t coords_per_param = 0;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  real max_rel_error = 0;
  std::string worst_param;
  std::size_t worst_coord = 0;
  real worst_analytic = 0;
  real worst_numeric = 0;
};

/// Central-difference check of analytic gradients.
///
/// `loss_and_grad` must clear the parameter gradients, run a deterministic
/// forward/backward pass and return the loss with gradients populated.
/// Returns the max over sampled coordinates of
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
inline GradCheckResult finite_difference_check(
    const std::function<real()>& loss_and_grad,
    const std::vector<Parameter*>& params, GradCheckOptions opt = {}) {
  const real base = loss_and_grad();
  std::vector<Array> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->gradient);

  // A second evaluation must reproduce the loss bit-for-bit; anything else
  // means the loss function is not deterministic and the check is invalid.
  const real again = loss_and_grad();
  if (again != base)
    throw std::runtime_error(
        "finite_difference_check: loss function is not deterministic");

  Rng rng(opt.seed);
  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    const std::size_t n = p.value.size();
    std::vector<std::size_t> coords;
    if (opt.coords_per_param == 0 || opt.coords_per_param >= n) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      for (std::size_t i = 0; i < opt.coords_per_param; ++i)
        coords.push_back(static_cast<std::size_t>(rng.below(n)));
    }
    for (std::size_t c : coords) {
      const real saved = p.value[c];
      p.value[c] = saved + opt.eps;
      const real up = loss_and_grad();
      p.value[c] = saved - opt.eps;
      const real down = loss_and_grad();
      p.value[c] = saved;
      const real numeric = (up - down) / (2 * opt.eps);
      const real a = analytic[pi][c];
      const real denom = std::max({std::abs(a), std::abs(numeric),
                                   real(1e-8)});
      const real rel = std::abs(a - numeric) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p.name;
        result.worst_coord = c;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  // restore the gradients of the unperturbed point
  loss_and_grad();
  return result;
}

}  // namespace mvcnn
