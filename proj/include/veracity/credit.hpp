#pragma once

#include <algorithm>
#include <cmath>

#include "veracity/corpus.hpp"

namespace veracity::credit {

// Fixed class weights of the credibility aggregate. Hyper-parameters, never
// touched by training.
struct ClassWeights {
  double mostly_true = 0.2;
  double half_true = 0.5;
  double barely_true = 0.75;
  double false_ = 0.9;
  double pants_on_fire = 1.0;
};

struct CreditScoreParams {
  ClassWeights class_weights;
  double w = 1.0;  // trainable
  double b = 0.0;  // trainable
};

// Weighted history fraction in [0, 1]. A speaker with no history maps to 0,
// which makes the pre-activation collapse to the learned bias.
inline double history_ratio(const corpus::CreditCounts& c,
                            const ClassWeights& cw = ClassWeights{}) {
  const double total = c.total();
  if (total <= 0.0) return 0.0;
  const double num = cw.mostly_true * c.mostly_true + cw.half_true * c.half_true +
                     cw.barely_true * c.barely_true + cw.false_ * c.false_ +
                     cw.pants_on_fire * c.pants_on_fire;
  return num / total;
}

inline double credit_score(const corpus::CreditCounts& c,
                           const CreditScoreParams& p = CreditScoreParams{}) {
  const double s = std::tanh(p.w * history_ratio(c, p.class_weights) + p.b);
  // tanh rounds to ±1.0 in double precision once |pre| exceeds ~19; keep the
  // score strictly inside the open interval
  const double limit = std::nextafter(1.0, 0.0);
  return std::clamp(s, -limit, limit);
}

// d(credit_score)/dw and /db for a given history; used by the C branch.
struct CreditScoreGrad {
  double dw = 0;
  double db = 0;
};

inline CreditScoreGrad credit_score_grad(const corpus::CreditCounts& c,
                                         const CreditScoreParams& p) {
  const double r = history_ratio(c, p.class_weights);
  const double s = std::tanh(p.w * r + p.b);
  const double dpre = 1.0 - s * s;
  return CreditScoreGrad{dpre * r, dpre};
}

}  // namespace veracity::credit
