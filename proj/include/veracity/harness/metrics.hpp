#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "veracity/corpus.hpp"

namespace veracity::harness {

// Square count matrix indexed [true class][predicted class]. In the binary
// space class 0 (fake) is the positive class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes) : classes_(classes) {
    if (classes < 2) throw std::invalid_argument("confusion matrix needs >= 2 classes");
    counts_.assign(static_cast<std::size_t>(classes) * classes, 0);
  }

  int classes() const { return classes_; }

  void add(int truth, int pred, long long count = 1) {
    if (truth < 0 || truth >= classes_ || pred < 0 || pred >= classes_)
      throw std::out_of_range("confusion matrix index out of range");
    counts_[static_cast<std::size_t>(truth) * classes_ + pred] += count;
  }

  long long at(int truth, int pred) const {
    return counts_[static_cast<std::size_t>(truth) * classes_ + pred];
  }

  long long total() const {
    long long t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  struct BinaryView {
    long long tp = 0, tn = 0, fp = 0, fn = 0;
  };

  BinaryView binary_view() const {
    if (classes_ != 2)
      throw std::logic_error("binary view of a non-binary confusion matrix");
    BinaryView v;
    v.tp = at(0, 0);  // predicted fake, actually fake
    v.fn = at(0, 1);
    v.fp = at(1, 0);
    v.tn = at(1, 1);
    return v;
  }

  // Collapse a six-way matrix to the binary space through the label mapping.
  ConfusionMatrix collapse_to_binary() const {
    if (classes_ != corpus::kNumLabelsSix)
      throw std::logic_error("collapse expects a six-way matrix");
    ConfusionMatrix out(corpus::kNumLabelsBinary);
    for (int t = 0; t < classes_; ++t)
      for (int p = 0; p < classes_; ++p)
        out.add(static_cast<int>(corpus::to_binary(static_cast<corpus::LabelSix>(t))),
                static_cast<int>(corpus::to_binary(static_cast<corpus::LabelSix>(p))),
                at(t, p));
    return out;
  }

 private:
  int classes_;
  std::vector<long long> counts_;
};

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
};

struct MetricsFragment {
  int classes = 0;
  double accuracy = 0;
  // binary view, fake positive (classes == 2)
  double precision = 0, recall = 0, f1 = 0;
  // one-vs-rest per class plus unweighted macro averages
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
};

namespace detail {

inline double safe_div(double num, double den) { return den > 0 ? num / den : 0.0; }

inline double f1_of(double p, double r) { return safe_div(2 * p * r, p + r); }

}  // namespace detail

inline MetricsFragment metrics(const ConfusionMatrix& cm) {
  const long long total = cm.total();
  if (total == 0) throw std::invalid_argument("metrics of an empty confusion matrix");
  MetricsFragment out;
  out.classes = cm.classes();
  long long correct = 0;
  for (int c = 0; c < cm.classes(); ++c) correct += cm.at(c, c);
  out.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  out.per_class.resize(static_cast<std::size_t>(cm.classes()));
  for (int c = 0; c < cm.classes(); ++c) {
    long long tp = cm.at(c, c), fp = 0, fn = 0;
    for (int o = 0; o < cm.classes(); ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    auto& m = out.per_class[static_cast<std::size_t>(c)];
    m.precision = detail::safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
    m.recall = detail::safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
    m.f1 = detail::f1_of(m.precision, m.recall);
    out.macro_precision += m.precision;
    out.macro_recall += m.recall;
    out.macro_f1 += m.f1;
  }
  out.macro_precision /= cm.classes();
  out.macro_recall /= cm.classes();
  out.macro_f1 /= cm.classes();
  if (cm.classes() == 2) {
    const auto v = cm.binary_view();
    out.precision = detail::safe_div(static_cast<double>(v.tp),
                                     static_cast<double>(v.tp + v.fp));
    out.recall = detail::safe_div(static_cast<double>(v.tp),
                                  static_cast<double>(v.tp + v.fn));
    out.f1 = detail::f1_of(out.precision, out.recall);
  }
  return out;
}

}  // namespace veracity::harness
