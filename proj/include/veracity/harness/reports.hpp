#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "veracity/corpus.hpp"
#include "veracity/harness/metrics.hpp"

namespace veracity::harness {

struct MetricsReport {
  std::string model;
  std::string label_space;  // "binary" or "six"
  MetricsFragment test;
  MetricsFragment train;
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
  int best_epoch = 0;
  int epochs_run = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string split_manifest;
  std::size_t max_len_s = 0;
  std::size_t max_len_j = 0;
  double threshold = 0.5;
};

inline nlohmann::json fragment_to_json(const MetricsFragment& f,
                                       corpus::LabelSpace space) {
  nlohmann::json j;
  j["accuracy"] = f.accuracy;
  if (f.classes == 2) {
    j["precision"] = f.precision;
    j["recall"] = f.recall;
    j["f1"] = f.f1;
  }
  auto per_class = nlohmann::json::array();
  for (int c = 0; c < f.classes; ++c) {
    const auto& m = f.per_class[static_cast<std::size_t>(c)];
    per_class.push_back({{"class", corpus::class_name(c, space)},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1}});
  }
  j["per_class"] = per_class;
  j["macro_precision"] = f.macro_precision;
  j["macro_recall"] = f.macro_recall;
  j["macro_f1"] = f.macro_f1;
  return j;
}

inline MetricsFragment fragment_from_json(const nlohmann::json& j) {
  MetricsFragment f;
  f.accuracy = j.at("accuracy");
  f.precision = j.value("precision", 0.0);
  f.recall = j.value("recall", 0.0);
  f.f1 = j.value("f1", 0.0);
  for (const auto& pc : j.value("per_class", nlohmann::json::array()))
    f.per_class.push_back({pc.at("precision"), pc.at("recall"), pc.at("f1")});
  f.classes = static_cast<int>(f.per_class.size());
  f.macro_precision = j.value("macro_precision", 0.0);
  f.macro_recall = j.value("macro_recall", 0.0);
  f.macro_f1 = j.value("macro_f1", 0.0);
  return f;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  const auto space = r.label_space == "binary" ? corpus::LabelSpace::binary
                                               : corpus::LabelSpace::six;
  nlohmann::json j;
  j["model"] = r.model;
  j["label_space"] = r.label_space;
  if (r.test.classes > 0) j["test"] = fragment_to_json(r.test, space);
  if (r.train.classes > 0) j["train"] = fragment_to_json(r.train, space);
  j["loss_history"] = {{"train", r.train_loss}, {"validation", r.valid_loss}};
  j["best_epoch"] = r.best_epoch;
  j["epochs_run"] = r.epochs_run;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["split_manifest"] = r.split_manifest;
  j["max_len_s"] = r.max_len_s;
  j["max_len_j"] = r.max_len_j;
  j["threshold"] = r.threshold;
  return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.model = j.at("model");
  r.label_space = j.at("label_space");
  if (j.contains("test")) r.test = fragment_from_json(j.at("test"));
  if (j.contains("train")) r.train = fragment_from_json(j.at("train"));
  if (j.contains("loss_history")) {
    r.train_loss = j["loss_history"].value("train", std::vector<double>{});
    r.valid_loss = j["loss_history"].value("validation", std::vector<double>{});
  }
  r.best_epoch = j.value("best_epoch", 0);
  r.epochs_run = j.value("epochs_run", 0);
  r.config_hash = j.value("config_hash", "");
  r.seed = j.value("seed", std::uint64_t{0});
  r.split_manifest = j.value("split_manifest", "");
  r.max_len_s = j.value("max_len_s", std::size_t{0});
  r.max_len_j = j.value("max_len_j", std::size_t{0});
  r.threshold = j.value("threshold", 0.5);
  return r;
}

// Two-column (epoch, loss) series for external plotting.
inline void write_loss_history(const std::string& path,
                               const std::vector<double>& losses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open loss history file: " + path);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", i + 1, losses[i]);
    out << buf;
  }
}

struct CVReport {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<MetricsReport> folds;
  std::map<std::string, double> mean;
  std::map<std::string, double> variance;  // population variance over folds
};

// Mean and population variance of each headline metric across folds.
inline void compute_cv_stats(CVReport& cv) {
  const auto metric_value = [](const MetricsReport& r,
                               const std::string& key) -> double {
    if (key == "accuracy") return r.test.accuracy;
    if (key == "precision") return r.test.precision;
    if (key == "recall") return r.test.recall;
    if (key == "f1") return r.test.f1;
    if (key == "macro_precision") return r.test.macro_precision;
    if (key == "macro_recall") return r.test.macro_recall;
    if (key == "macro_f1") return r.test.macro_f1;
    throw std::logic_error("unknown metric key " + key);
  };
  cv.mean.clear();
  cv.variance.clear();
  const double n = static_cast<double>(cv.folds.size());
  for (const std::string key : {"accuracy", "precision", "recall", "f1",
                                "macro_precision", "macro_recall", "macro_f1"}) {
    double sum = 0;
    for (const auto& f : cv.folds) sum += metric_value(f, key);
    const double mean = sum / n;
    double var = 0;
    for (const auto& f : cv.folds) {
      const double d = metric_value(f, key) - mean;
      var += d * d;
    }
    cv.mean[key] = mean;
    cv.variance[key] = var / n;
  }
}

inline nlohmann::json to_json(const CVReport& cv) {
  nlohmann::json j;
  j["k"] = cv.k;
  j["seed"] = cv.seed;
  j["variance_kind"] = "population";
  auto folds = nlohmann::json::array();
  for (const auto& f : cv.folds) folds.push_back(to_json(f));
  j["folds"] = folds;
  j["mean"] = cv.mean;
  j["variance"] = cv.variance;
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open json file: " + path);
  return nlohmann::json::parse(in);
}

}  // namespace veracity::harness
