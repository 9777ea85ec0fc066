#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "veracity/corpus.hpp"

namespace veracity::models {

// Categorical metadata fields fed to the M branch, in encoding order.
enum class MetaField : int { subject, speaker, job, state, party, context };
inline constexpr int kNumMetaFields = 6;
inline constexpr const char* kMetaFieldNames[kNumMetaFields] = {
    "subject", "speaker", "job", "state", "party", "context"};

inline std::vector<std::string> field_values(const corpus::Record& r,
                                             MetaField f) {
  switch (f) {
    case MetaField::subject: return r.subject;
    case MetaField::speaker: return {r.speaker};
    case MetaField::job: return {r.job.value_or(corpus::kUnknownToken)};
    case MetaField::state: return {r.state.value_or(corpus::kUnknownToken)};
    case MetaField::party: return {r.party.value_or(corpus::kUnknownToken)};
    case MetaField::context: return {r.context.value_or(corpus::kUnknownToken)};
  }
  return {};
}

struct MetaEncoded {
  std::array<std::vector<std::size_t>, kNumMetaFields> rows;  // embedding rows
  std::array<double, corpus::kNumCountFields> counts{};       // standardized
};

// Vocabulary and count standardization for the metadata branch, built from
// the training partition only. Row 0 of each field embedding is the unknown
// category; unseen values map there.
class MetadataEncoder {
 public:
  MetadataEncoder() = default;

  static MetadataEncoder build(const std::vector<corpus::Record>& train) {
    MetadataEncoder enc;
    for (int f = 0; f < kNumMetaFields; ++f) {
      std::set<std::string> values;  // ordered for determinism
      for (const auto& r : train)
        for (auto& v : field_values(r, static_cast<MetaField>(f)))
          if (!v.empty() && v != corpus::kUnknownToken) values.insert(v);
      enc.vocab_[f].assign(values.begin(), values.end());
      for (std::size_t i = 0; i < enc.vocab_[f].size(); ++i)
        enc.index_[f][enc.vocab_[f][i]] = i + 1;
    }
    for (int c = 0; c < corpus::kNumCountFields; ++c) {
      double sum = 0, sq = 0;
      for (const auto& r : train) {
        const double v = r.counts[c].value_or(0.0);
        sum += v;
        sq += v * v;
      }
      const double n = static_cast<double>(train.size());
      const double mean = n > 0 ? sum / n : 0.0;
      const double var = n > 0 ? std::max(0.0, sq / n - mean * mean) : 0.0;
      enc.count_mean_[c] = mean;
      enc.count_std_[c] = var > 0 ? std::sqrt(var) : 1.0;
    }
    return enc;
  }

  std::size_t vocab_size(int field) const { return vocab_[field].size(); }

  // embedding rows including the unknown row
  std::size_t embedding_rows(int field) const { return vocab_[field].size() + 1; }

  std::size_t row_of(int field, const std::string& value) const {
    auto it = index_[field].find(value);
    return it == index_[field].end() ? 0 : it->second;
  }

  MetaEncoded encode(const corpus::Record& r) const {
    MetaEncoded out;
    for (int f = 0; f < kNumMetaFields; ++f) {
      auto values = field_values(r, static_cast<MetaField>(f));
      if (values.empty()) values.push_back(corpus::kUnknownToken);
      for (const auto& v : values) out.rows[f].push_back(row_of(f, v));
    }
    for (int c = 0; c < corpus::kNumCountFields; ++c)
      out.counts[c] =
          (r.counts[c].value_or(count_mean_[c]) - count_mean_[c]) / count_std_[c];
    return out;
  }

  std::array<double, corpus::kNumCountFields> count_means() const {
    return count_mean_;
  }
  std::array<double, corpus::kNumCountFields> count_stds() const {
    return count_std_;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (int f = 0; f < kNumMetaFields; ++f)
      j["vocab"][kMetaFieldNames[f]] = vocab_[f];
    j["count_mean"] = count_mean_;
    j["count_std"] = count_std_;
    return j;
  }

  static MetadataEncoder from_json(const nlohmann::json& j) {
    MetadataEncoder enc;
    for (int f = 0; f < kNumMetaFields; ++f) {
      enc.vocab_[f] =
          j.at("vocab").at(kMetaFieldNames[f]).get<std::vector<std::string>>();
      for (std::size_t i = 0; i < enc.vocab_[f].size(); ++i)
        enc.index_[f][enc.vocab_[f][i]] = i + 1;
    }
    auto mean = j.at("count_mean").get<std::vector<double>>();
    auto stdv = j.at("count_std").get<std::vector<double>>();
    std::copy(mean.begin(), mean.end(), enc.count_mean_.begin());
    std::copy(stdv.begin(), stdv.end(), enc.count_std_.begin());
    return enc;
  }

 private:
  std::array<std::vector<std::string>, kNumMetaFields> vocab_;
  std::array<std::unordered_map<std::string, std::size_t>, kNumMetaFields> index_;
  std::array<double, corpus::kNumCountFields> count_mean_{};
  std::array<double, corpus::kNumCountFields> count_std_{1, 1, 1, 1, 1};
};

}  // namespace veracity::models
