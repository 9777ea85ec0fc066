#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "veracity/corpus.hpp"
#include "veracity/harness/train.hpp"
#include "veracity/models/regression.hpp"

namespace veracity::harness {

struct CVConfig {
  int k = 5;
  std::uint64_t seed = 0;
  // fraction of each fold's training part carved out (stratified) as the
  // validation set for early stopping of the branch networks
  double validation_fraction = 0.1;
  models::RegressionHyper regression;
};

inline MetricsReport evaluate_regression(const models::RegressionModel& model,
                                         const std::vector<double>& x,
                                         const std::vector<int>& y, int classes,
                                         corpus::LabelSpace space) {
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < y.size(); ++i)
    cm.add(y[i], model.predict(x.data() + i * model.dim));
  MetricsReport r;
  r.model = models::kind_name(model.kind);
  r.label_space = models::label_space_name(space);
  r.test = metrics(cm);
  return r;
}

struct FittedRegression {
  models::RegressionModel model;
  models::RegressionFeatureSpec spec;
  corpus::TrainingStats stats;
};

// Regression baseline on one train/test record split: impute and standardize
// from the training part, fit, report test metrics. The fitted model is
// handed back through `fitted` when the caller wants to checkpoint it.
inline MetricsReport run_regression_split(
    models::ModelKind kind, corpus::LabelSpace space,
    const std::vector<corpus::Record>& train_records,
    const std::vector<corpus::Record>& test_records,
    const text::EmbeddingTable& table, const models::RegressionHyper& hyper,
    bool use_justification, FittedRegression* fitted = nullptr) {
  const auto stats = corpus::training_stats(train_records);
  const auto train = corpus::impute_missing(train_records, stats);
  const auto test = corpus::impute_missing(test_records, stats);
  const auto spec = models::make_feature_spec(train, use_justification);
  const auto x_train = models::regression_features(train, table, spec);
  const int classes = corpus::num_classes(space);
  std::vector<int> y_train;
  y_train.reserve(train.size());
  for (const auto& r : train) y_train.push_back(corpus::class_of(r, space));
  const auto model = models::fit_regression(kind, x_train, y_train,
                                            spec.dim(table), classes, hyper);
  MetricsReport report;
  report.model = models::kind_name(kind);
  report.label_space = models::label_space_name(space);
  if (!test.empty()) {
    const auto x_test = models::regression_features(test, table, spec);
    std::vector<int> y_test;
    y_test.reserve(test.size());
    for (const auto& r : test) y_test.push_back(corpus::class_of(r, space));
    report = evaluate_regression(model, x_test, y_test, classes, space);
  }
  ConfusionMatrix cm_train(classes);
  for (std::size_t i = 0; i < y_train.size(); ++i)
    cm_train.add(y_train[i], model.predict(x_train.data() + i * model.dim));
  report.train = metrics(cm_train);
  if (fitted) *fitted = FittedRegression{model, spec, stats};
  return report;
}

// Stratified k-fold cross-validation over the given record pool. The pool
// should be train + validation of the official split; the held-out test file
// is never folded.
inline CVReport cross_validate(const models::ModelConfig& cfg,
                               const std::vector<corpus::Record>& pool,
                               const text::EmbeddingTable& table,
                               const TrainConfig& tcfg, const CVConfig& cvcfg) {
  if (cvcfg.k < 2) throw std::invalid_argument("cross validation requires k >= 2");
  const auto folds =
      corpus::stratified_folds(pool, cvcfg.k, cvcfg.seed, cfg.label_space);
  CVReport cv;
  cv.k = cvcfg.k;
  cv.seed = cvcfg.seed;
  const bool use_just =
      models::is_regression(cfg.kind)
          ? std::all_of(pool.begin(), pool.end(),
                        [](const auto& r) { return r.justification.has_value(); })
          : models::has_j_branch(cfg.kind);
  for (int f = 0; f < cvcfg.k; ++f) {
    const auto train_records = corpus::take(pool, folds[static_cast<std::size_t>(f)].train);
    const auto test_records = corpus::take(pool, folds[static_cast<std::size_t>(f)].test);
    MetricsReport report;
    if (models::is_regression(cfg.kind)) {
      report = run_regression_split(cfg.kind, cfg.label_space, train_records,
                                    test_records, table, cvcfg.regression, use_just);
    } else {
      // carve a stratified validation subset out of the fold's training part
      int k2 = std::max(
          2, static_cast<int>(std::llround(1.0 / std::max(0.05, cvcfg.validation_fraction))));
      std::vector<std::size_t> class_sizes(corpus::num_classes(cfg.label_space), 0);
      for (const auto& r : train_records)
        ++class_sizes[static_cast<std::size_t>(corpus::class_of(r, cfg.label_space))];
      const auto smallest = *std::min_element(class_sizes.begin(), class_sizes.end());
      k2 = std::max(2, std::min<int>(k2, static_cast<int>(smallest)));
      const auto inner = corpus::stratified_folds(
          train_records, k2, derive_seed(cvcfg.seed, "cv-valid", static_cast<std::uint64_t>(f)),
          cfg.label_space);
      TrainConfig fold_cfg = tcfg;
      fold_cfg.seed = derive_seed(tcfg.seed, "cv-fold", static_cast<std::uint64_t>(f));
      auto result = train_eval(cfg, corpus::take(train_records, inner[0].train),
                               corpus::take(train_records, inner[0].test),
                               test_records, table, fold_cfg,
                               "cv-fold-" + std::to_string(f));
      report = std::move(result.report);
    }
    report.seed = cvcfg.seed;
    report.split_manifest = "cv-fold-" + std::to_string(f);
    cv.folds.push_back(std::move(report));
  }
  compute_cv_stats(cv);
  return cv;
}

}  // namespace veracity::harness
