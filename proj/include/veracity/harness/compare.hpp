#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "veracity/harness/reports.hpp"

namespace veracity::harness {

// Pairwise accuracy deltas plus a verdict table for the three ranking
// hypotheses: justification helps, the credit/metadata branch helps, and the
// branch networks beat the regression baselines. Reports must share a label
// space and evaluation split.
inline nlohmann::json compare(const std::vector<MetricsReport>& reports) {
  if (reports.size() < 2)
    throw std::invalid_argument("compare needs at least two reports");
  for (const auto& r : reports) {
    if (r.label_space != reports[0].label_space)
      throw std::invalid_argument("compare: reports mix label spaces");
    if (r.split_manifest != reports[0].split_manifest)
      throw std::invalid_argument("compare: reports evaluate different splits");
  }
  const auto accuracy_of = [&](const std::string& model) -> std::optional<double> {
    for (const auto& r : reports)
      if (r.model == model) return r.test.accuracy;
    return std::nullopt;
  };

  nlohmann::json j;
  auto entries = nlohmann::json::array();
  std::vector<const MetricsReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->test.accuracy > b->test.accuracy;
  });
  for (const auto* r : sorted)
    entries.push_back({{"model", r->model}, {"accuracy", r->test.accuracy}});
  j["entries"] = entries;

  auto deltas = nlohmann::json::array();
  for (std::size_t a = 0; a < reports.size(); ++a)
    for (std::size_t b = a + 1; b < reports.size(); ++b)
      deltas.push_back({{"a", reports[a].model},
                        {"b", reports[b].model},
                        {"delta", reports[a].test.accuracy - reports[b].test.accuracy}});
  j["deltas"] = deltas;

  nlohmann::json verdicts = nlohmann::json::object();
  if (auto sj = accuracy_of("seq-just")) {
    if (auto s = accuracy_of("seq"))
      verdicts["justification_helps"] = {{"delta", *sj - *s}, {"holds", *sj > *s}};
    if (auto e = accuracy_of("enhanced"))
      verdicts["credit_metadata_helps"] = {{"delta", *e - *sj}, {"holds", *e > *sj}};
  }
  double best_baseline = -1;
  std::string baseline_name;
  for (const auto& r : reports) {
    if ((r.model == "linreg" || r.model == "logreg-ovr" ||
         r.model == "ordinal-logreg") &&
        r.test.accuracy > best_baseline) {
      best_baseline = r.test.accuracy;
      baseline_name = r.model;
    }
  }
  if (best_baseline >= 0) {
    nlohmann::json vs = nlohmann::json::object();
    for (const char* model : {"seq", "seq-just", "enhanced", "siamese-shared"}) {
      if (auto a = accuracy_of(model))
        vs[model] = {{"delta", *a - best_baseline}, {"holds", *a > best_baseline}};
    }
    verdicts["beats_baseline"] = {{"baseline", baseline_name},
                                  {"accuracy", best_baseline},
                                  {"models", vs}};
  }
  j["verdicts"] = verdicts;
  j["label_space"] = reports[0].label_space;
  j["split_manifest"] = reports[0].split_manifest;
  return j;
}

}  // namespace veracity::harness
