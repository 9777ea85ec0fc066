#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "veracity/engine/tensor.hpp"

namespace veracity::engine {

enum class LossKind { binary, categorical };

inline constexpr double kProbEps = 1e-7;

namespace detail {

inline double clamp_prob(double p) {
  return std::min(1.0 - kProbEps, std::max(kProbEps, p));
}

// Probability assigned to `target`. A 1-element distribution is read as the
// positive-class probability, i.e. P(class 0).
inline double prob_of_target(const double* probs, std::size_t n, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= std::max<std::size_t>(n, 2))
    throw std::out_of_range("cross entropy target index out of range");
  if (n == 1) return target == 0 ? probs[0] : 1.0 - probs[0];
  return probs[static_cast<std::size_t>(target)];
}

}  // namespace detail

// -log of the (clamped) probability of the target class.
inline double cross_entropy(const double* probs, std::size_t n, int target,
                            LossKind kind) {
  if (kind == LossKind::categorical && n < 2)
    throw std::invalid_argument("categorical cross entropy needs >= 2 classes");
  return -std::log(detail::clamp_prob(detail::prob_of_target(probs, n, target)));
}

// Gradient w.r.t. the probability vector; zero where the clamp is active.
inline void cross_entropy_grad(const double* probs, std::size_t n, int target,
                               LossKind kind, double* dprobs) {
  (void)kind;
  std::fill(dprobs, dprobs + n, 0.0);
  const double p = detail::prob_of_target(probs, n, target);
  if (p <= kProbEps || p >= 1.0 - kProbEps) return;
  if (n == 1) {
    dprobs[0] = target == 0 ? -1.0 / p : 1.0 / p;
    return;
  }
  dprobs[static_cast<std::size_t>(target)] = -1.0 / p;
}

// Batch mean over a (B x C) probability tensor. Rows must be distributions
// when C >= 2.
inline double cross_entropy(const Tensor& probs, const std::vector<int>& targets,
                            LossKind kind) {
  const bool batched = probs.shape.size() == 2;
  const std::size_t rows = batched ? probs.rows() : 1;
  const std::size_t n = batched ? probs.cols() : probs.size();
  if (targets.size() != rows)
    throw std::invalid_argument("cross entropy: target count mismatch");
  if (n >= 2) {
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0;
      for (std::size_t j = 0; j < n; ++j) sum += probs.v[r * n + j];
      if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("cross entropy: row is not a distribution");
    }
  }
  double total = 0;
  for (std::size_t r = 0; r < rows; ++r)
    total += cross_entropy(probs.data() + r * n, n, targets[r], kind);
  return total / static_cast<double>(rows);
}

}  // namespace veracity::engine
