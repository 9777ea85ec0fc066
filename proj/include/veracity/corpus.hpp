#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "veracity/rng.hpp"

namespace veracity::corpus {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Six-grained veracity labels, ordered least to most truthful.
enum class LabelSix : int {
  pants_on_fire = 0,
  false_ = 1,
  barely_true = 2,
  half_true = 3,
  mostly_true = 4,
  true_ = 5,
};

inline constexpr int kNumLabelsSix = 6;

// Binary collapse. `fake` is the positive class throughout.
enum class LabelBinary : int { fake = 0, real = 1 };

inline constexpr int kNumLabelsBinary = 2;

inline LabelBinary to_binary(LabelSix l) {
  return static_cast<int>(l) <= static_cast<int>(LabelSix::barely_true)
             ? LabelBinary::fake
             : LabelBinary::real;
}

inline const char* label_name(LabelSix l) {
  switch (l) {
    case LabelSix::pants_on_fire: return "pants-fire";
    case LabelSix::false_: return "false";
    case LabelSix::barely_true: return "barely-true";
    case LabelSix::half_true: return "half-true";
    case LabelSix::mostly_true: return "mostly-true";
    case LabelSix::true_: return "true";
  }
  return "?";
}

inline const char* label_name(LabelBinary l) {
  return l == LabelBinary::fake ? "false" : "true";
}

inline std::optional<LabelSix> parse_label(std::string_view s) {
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "pants-fire" || t == "pants-on-fire") return LabelSix::pants_on_fire;
  if (t == "false") return LabelSix::false_;
  if (t == "barely-true") return LabelSix::barely_true;
  if (t == "half-true") return LabelSix::half_true;
  if (t == "mostly-true") return LabelSix::mostly_true;
  if (t == "true") return LabelSix::true_;
  return std::nullopt;
}

// Speaker history counts in dataset column order. Real-valued so that
// mean-imputed entries can be carried through as features.
struct CreditCounts {
  double barely_true = 0;
  double false_ = 0;
  double half_true = 0;
  double mostly_true = 0;
  double pants_on_fire = 0;

  double total() const {
    return barely_true + false_ + half_true + mostly_true + pants_on_fire;
  }
  bool operator==(const CreditCounts&) const = default;
};

inline constexpr int kNumCountFields = 5;
inline constexpr const char* kCountFieldNames[kNumCountFields] = {
    "barely_true", "false", "half_true", "mostly_true", "pants_on_fire"};

enum class Variant { liar, liar_plus };

inline constexpr const char* kUnknownToken = "<unknown>";

struct Record {
  std::string id;
  LabelSix label = LabelSix::false_;
  std::string statement;
  std::vector<std::string> subject;  // comma-split topics, may be empty
  std::string speaker;
  std::optional<std::string> job;
  std::optional<std::string> state;
  std::optional<std::string> party;
  // counts in column order barely_true, false, half_true, mostly_true,
  // pants_on_fire; nullopt where the cell was empty
  std::array<std::optional<double>, kNumCountFields> counts;
  std::optional<std::string> context;
  std::optional<std::string> justification;  // present iff liar_plus

  bool counts_complete() const {
    return std::all_of(counts.begin(), counts.end(),
                       [](const auto& c) { return c.has_value(); });
  }

  CreditCounts credit_counts() const {
    if (!counts_complete())
      throw std::logic_error("record " + id + " has missing credit counts");
    return CreditCounts{*counts[0], *counts[1], *counts[2], *counts[3],
                        *counts[4]};
  }

  bool operator==(const Record&) const = default;
};

inline int column_count(Variant v) { return v == Variant::liar ? 14 : 15; }

namespace detail {

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::optional<double> parse_count_cell(std::string_view cell,
                                              std::size_t row, int col) {
  if (cell.empty()) return std::nullopt;
  long long v = 0;
  std::size_t i = 0;
  for (; i < cell.size() && i < 16; ++i) {
    char c = cell[i];
    if (c < '0' || c > '9') break;
    v = v * 10 + (c - '0');
  }
  if (i != cell.size())
    throw ParseError("row " + std::to_string(row) + ", column " +
                     std::to_string(col) + ": count is not a non-negative integer: '" +
                     std::string(cell) + "'");
  return static_cast<double>(v);
}

inline std::optional<std::string> opt_field(std::string&& s) {
  if (s.empty()) return std::nullopt;
  return std::make_optional(std::move(s));
}

}  // namespace detail

inline Record parse_row(const std::vector<std::string>& cols, Variant variant,
                        std::size_t row, bool require_label = true) {
  Record r;
  r.id = cols[0];
  if (require_label || !cols[1].empty()) {
    auto label = parse_label(cols[1]);
    if (!label)
      throw ParseError("row " + std::to_string(row) +
                       ", column 2: unknown label string '" + cols[1] + "'");
    r.label = *label;
  }
  r.statement = cols[2];
  if (r.statement.empty())
    throw ParseError("row " + std::to_string(row) +
                     ", column 3: empty statement");
  if (!cols[3].empty()) r.subject = detail::split(cols[3], ',');
  r.speaker = cols[4];
  r.job = detail::opt_field(std::string(cols[5]));
  r.state = detail::opt_field(std::string(cols[6]));
  r.party = detail::opt_field(std::string(cols[7]));
  for (int i = 0; i < kNumCountFields; ++i)
    r.counts[i] = detail::parse_count_cell(cols[8 + i], row, 9 + i);
  r.context = detail::opt_field(std::string(cols[13]));
  if (variant == Variant::liar_plus) r.justification = cols[14];
  return r;
}

// One Record per data row of a tab-separated file. Rows must have exactly
// the variant's column count; `require_label=false` lets the label cell be
// empty (used when labelling fresh statements).
inline std::vector<Record> parse_liar(std::istream& in, Variant variant,
                                      bool require_label = true) {
  std::vector<Record> records;
  std::string line;
  std::size_t row = 0;
  const int want = column_count(variant);
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = detail::split(line, '\t');
    if (static_cast<int>(cols.size()) != want)
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(want) + " columns, got " +
                       std::to_string(cols.size()));
    records.push_back(parse_row(cols, variant, row, require_label));
  }
  return records;
}

inline std::vector<Record> parse_liar(const std::string& path, Variant variant,
                                      bool require_label = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  return parse_liar(in, variant, require_label);
}

namespace detail {

inline std::string format_count(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Normalized TSV writer, identical column layout to the parser.
inline void write_liar(std::ostream& out, const std::vector<Record>& records,
                       Variant variant) {
  for (const auto& r : records) {
    out << r.id << '\t' << label_name(r.label) << '\t' << r.statement << '\t';
    for (std::size_t i = 0; i < r.subject.size(); ++i) {
      if (i) out << ',';
      out << r.subject[i];
    }
    out << '\t' << r.speaker << '\t' << r.job.value_or("") << '\t'
        << r.state.value_or("") << '\t' << r.party.value_or("");
    for (const auto& c : r.counts) {
      out << '\t';
      if (c) out << detail::format_count(*c);
    }
    out << '\t' << r.context.value_or("");
    if (variant == Variant::liar_plus) {
      if (!r.justification)
        throw std::logic_error("record " + r.id +
                               " lacks a justification for a liar-plus file");
      out << '\t' << *r.justification;
    }
    out << '\n';
  }
}

inline void write_liar(const std::string& path,
                       const std::vector<Record>& records, Variant variant) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_liar(out, records, variant);
}

// Per-count-field means over the training partition. Means are taken over
// the rows where the field is present.
struct TrainingStats {
  std::array<double, kNumCountFields> count_means{};
};

inline TrainingStats training_stats(const std::vector<Record>& train) {
  if (train.empty())
    throw std::invalid_argument("training statistics require a non-empty training set");
  TrainingStats s;
  for (int f = 0; f < kNumCountFields; ++f) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& r : train) {
      if (r.counts[f]) {
        sum += *r.counts[f];
        ++n;
      }
    }
    s.count_means[f] = n ? sum / static_cast<double>(n) : 0.0;
  }
  return s;
}

// Missing numeric fields -> training-set mean; missing categoricals -> the
// reserved unknown token. Everything else passes through unchanged.
inline std::vector<Record> impute_missing(std::vector<Record> records,
                                          const TrainingStats& stats) {
  for (auto& r : records) {
    for (int f = 0; f < kNumCountFields; ++f)
      if (!r.counts[f]) r.counts[f] = stats.count_means[f];
    if (!r.job) r.job = kUnknownToken;
    if (!r.state) r.state = kUnknownToken;
    if (!r.party) r.party = kUnknownToken;
    if (!r.context) r.context = kUnknownToken;
    if (r.subject.empty()) r.subject = {kUnknownToken};
    if (r.speaker.empty()) r.speaker = kUnknownToken;
  }
  return records;
}

enum class LabelSpace { binary, six };

inline int num_classes(LabelSpace s) {
  return s == LabelSpace::binary ? kNumLabelsBinary : kNumLabelsSix;
}

inline int class_of(const Record& r, LabelSpace s) {
  return s == LabelSpace::binary ? static_cast<int>(to_binary(r.label))
                                 : static_cast<int>(r.label);
}

inline std::string class_name(int cls, LabelSpace s) {
  if (s == LabelSpace::binary) return label_name(static_cast<LabelBinary>(cls));
  return label_name(static_cast<LabelSix>(cls));
}

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Stratified k-fold partitions: per-class test-fold sizes differ by at most
// one across folds, identical seed gives identical folds.
inline std::vector<FoldSplit> stratified_folds(const std::vector<Record>& records,
                                               int k, std::uint64_t seed,
                                               LabelSpace label_space) {
  if (k < 2) throw std::invalid_argument("stratified folds require k >= 2");
  const int nc = num_classes(label_space);
  std::vector<std::vector<std::size_t>> by_class(nc);
  for (std::size_t i = 0; i < records.size(); ++i)
    by_class[class_of(records[i], label_space)].push_back(i);
  for (int c = 0; c < nc; ++c) {
    if (by_class[c].size() < static_cast<std::size_t>(k))
      throw std::invalid_argument(
          "class '" + class_name(c, label_space) + "' has " +
          std::to_string(by_class[c].size()) + " members, fewer than k=" +
          std::to_string(k));
  }
  Rng rng(derive_seed(seed, "stratified_folds"));
  std::vector<std::vector<std::size_t>> test_folds(k);
  for (int c = 0; c < nc; ++c) {
    rng.shuffle(by_class[c]);
    for (std::size_t j = 0; j < by_class[c].size(); ++j)
      test_folds[j % k].push_back(by_class[c][j]);
  }
  std::vector<FoldSplit> folds(k);
  for (int f = 0; f < k; ++f) {
    std::sort(test_folds[f].begin(), test_folds[f].end());
    folds[f].test = test_folds[f];
    for (int g = 0; g < k; ++g)
      if (g != f)
        folds[f].train.insert(folds[f].train.end(), test_folds[g].begin(),
                              test_folds[g].end());
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

struct SplitSpec {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Stratified train/validation/test split by fractions (summing to ~1).
inline SplitSpec make_split(const std::vector<Record>& records, double train_frac,
                            double valid_frac, std::uint64_t seed,
                            LabelSpace label_space = LabelSpace::six) {
  if (train_frac <= 0 || valid_frac < 0 || train_frac + valid_frac >= 1.0)
    throw std::invalid_argument("invalid split fractions");
  const int nc = num_classes(label_space);
  std::vector<std::vector<std::size_t>> by_class(nc);
  for (std::size_t i = 0; i < records.size(); ++i)
    by_class[class_of(records[i], label_space)].push_back(i);
  Rng rng(derive_seed(seed, "make_split"));
  SplitSpec s;
  s.seed = seed;
  for (int c = 0; c < nc; ++c) {
    auto& idx = by_class[c];
    rng.shuffle(idx);
    auto n = idx.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    auto n_valid = static_cast<std::size_t>(std::llround(valid_frac * static_cast<double>(n)));
    n_train = std::min(n_train, n);
    n_valid = std::min(n_valid, n - n_train);
    for (std::size_t j = 0; j < n; ++j) {
      if (j < n_train)
        s.train.push_back(idx[j]);
      else if (j < n_train + n_valid)
        s.validation.push_back(idx[j]);
      else
        s.test.push_back(idx[j]);
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

inline std::vector<Record> take(const std::vector<Record>& records,
                                const std::vector<std::size_t>& idx) {
  std::vector<Record> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(records.at(i));
  return out;
}

}  // namespace veracity::corpus
