#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "veracity/engine/tensor.hpp"

namespace veracity::engine {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected update on one parameter array. `t` is the 1-based step
// counter, already incremented for this step.
inline void adam_step(double* params, const double* grads, double* m, double* v,
                      std::size_t n, long long t, const AdamConfig& cfg) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

// Optimizer state aligned with a ParamSet's registration order.
class AdamOptimizer {
 public:
  AdamOptimizer(const ParamSet& params, AdamConfig cfg = {}) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
      m_.emplace_back(p.value.shape);
      v_.emplace_back(p.value.shape);
    }
  }

  void step(ParamSet& params) {
    if (params.size() != m_.size())
      throw std::invalid_argument("optimizer state does not match parameter set");
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      adam_step(p.value.data(), p.grad.data(), m_[i].data(), v_[i].data(),
                p.value.size(), t_, cfg_);
    }
  }

  long long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  long long t_ = 0;
};

}  // namespace veracity::engine
