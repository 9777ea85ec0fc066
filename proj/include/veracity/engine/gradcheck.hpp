#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "veracity/engine/tensor.hpp"

namespace veracity::engine {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central-difference check of the gradients already stored in `params`.
// `loss_fn` must re-run the forward pass (and only the forward pass) with the
// current parameter values. Entries where both gradients are below the noise
// floor are ignored.
template <typename LossFn>
GradCheckResult gradient_check(ParamSet& params, LossFn&& loss_fn,
                               double step = 1e-4) {
  GradCheckResult res;
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.v[i];
      p.value.v[i] = saved + step;
      const double up = loss_fn();
      p.value.v[i] = saved - step;
      const double down = loss_fn();
      p.value.v[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad.v[i];
      const double denom = std::max(std::abs(numeric), std::abs(analytic));
      if (denom < 1e-8) continue;
      const double rel = std::abs(numeric - analytic) / denom;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst_param = p.name;
        res.worst_index = i;
        res.analytic = analytic;
        res.numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace veracity::engine
