#pragma once

// Pass/fail logic for the quantitative acceptance criteria, separated from
// the runner so the band and ordering rules are unit-testable without hours
// of training.

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "veracity/harness/metrics.hpp"

namespace acceptance {

enum class Status { pass, fail, skip, warn };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

inline bool in_band(double value, double center, double tol) {
  return value >= center - tol && value <= center + tol;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

// per-model test metrics over seeds 1..3
struct SeqRuns {
  std::map<std::string, std::vector<veracity::harness::MetricsFragment>> binary;
  std::map<std::string, std::vector<veracity::harness::MetricsFragment>> six;
};

inline double median_acc(const std::vector<veracity::harness::MetricsFragment>& runs) {
  return median3(runs[0].accuracy, runs[1].accuracy, runs[2].accuracy);
}

inline Outcome criterion_sequence_models(const SeqRuns& runs) {
  const double seq = median_acc(runs.binary.at("seq"));
  const double seq_just = median_acc(runs.binary.at("seq-just"));
  const double six_just = median_acc(runs.six.at("seq-just"));
  Outcome o;
  o.detail = "seq binary " + fmt(seq) + " (0.7862±0.04); seq-just binary " +
             fmt(seq_just) + " (0.8205±0.04); seq-just six " + fmt(six_just) +
             " (0.5015±0.05)";
  if (!in_band(seq, 0.7862, 0.04) || !in_band(seq_just, 0.8205, 0.04) ||
      !in_band(six_just, 0.5015, 0.05))
    o.status = Status::fail;
  return o;
}

// Out-of-band enhanced-model results demand a written analysis rather than an
// automatic failure, provided the ordering criterion holds.
inline Outcome criterion_enhanced(const SeqRuns& runs, bool orderings_hold) {
  const auto& bin = runs.binary.at("enhanced");
  const auto& six = runs.six.at("enhanced");
  const double acc_b = median_acc(bin);
  const double f1_b = median3(bin[0].f1, bin[1].f1, bin[2].f1);
  const double acc_s = median_acc(six);
  const double mf1_s = median3(six[0].macro_f1, six[1].macro_f1, six[2].macro_f1);
  const bool ok = in_band(acc_b, 0.8297, 0.04) && in_band(f1_b, 0.722, 0.05) &&
                  in_band(acc_s, 0.5272, 0.05) && in_band(mf1_s, 0.42, 0.05);
  Outcome o;
  o.detail = "binary acc " + fmt(acc_b) + " (0.8297±0.04) f1 " + fmt(f1_b) +
             " (0.722±0.05); six acc " + fmt(acc_s) + " (0.5272±0.05) macro-f1 " +
             fmt(mf1_s) + " (0.42±0.05)";
  if (!ok) {
    o.status = orderings_hold ? Status::warn : Status::fail;
    if (orderings_hold)
      o.detail += "; outside band: written analysis required (orderings hold)";
  }
  return o;
}

// Binary accuracy must order seq < seq-just < enhanced on the medians, and
// each pairwise ordering must hold for at least two of the three seeds.
inline Outcome criterion_orderings(const SeqRuns& runs, bool* holds_out) {
  const auto& seq = runs.binary.at("seq");
  const auto& seq_just = runs.binary.at("seq-just");
  const auto& enhanced = runs.binary.at("enhanced");
  int just_wins = 0, credit_wins = 0;
  for (int s = 0; s < 3; ++s) {
    if (seq_just[s].accuracy > seq[s].accuracy) ++just_wins;
    if (enhanced[s].accuracy > seq_just[s].accuracy) ++credit_wins;
  }
  const bool medians = median_acc(seq_just) > median_acc(seq) &&
                       median_acc(enhanced) > median_acc(seq_just);
  const bool holds = medians && just_wins >= 2 && credit_wins >= 2;
  if (holds_out) *holds_out = holds;
  Outcome o;
  o.detail = "median acc seq " + fmt(median_acc(seq)) + " < seq-just " +
             fmt(median_acc(seq_just)) + " < enhanced " + fmt(median_acc(enhanced)) +
             "; per-seed wins " + std::to_string(just_wins) + "/3 and " +
             std::to_string(credit_wins) + "/3";
  if (!holds) o.status = Status::fail;
  return o;
}

}  // namespace acceptance
