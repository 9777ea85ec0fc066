#pragma once

// Shared fixtures: deterministic synthetic corpora and embedding tables with
// class-dependent token distributions, speaker histories correlated with the
// labels, and occasional missing metadata.

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "veracity/corpus.hpp"
#include "veracity/rng.hpp"
#include "veracity/text.hpp"

namespace testsupport {

using veracity::Rng;
using veracity::corpus::LabelSix;
using veracity::corpus::Record;

struct SyntheticSpec {
  std::size_t records = 200;
  std::size_t dim = 16;
  std::size_t statement_len = 8;      // content tokens per statement
  std::size_t justification_len = 12; // content tokens per justification
  double class_token_rate = 0.45;     // chance a statement token is class-specific
  double just_token_rate = 0.65;
  double missing_rate = 0.1;
  std::size_t speakers = 24;
  std::size_t class_token_variety = 10;  // distinct class-marker tokens per class
  bool liar_plus = true;
};

inline std::vector<std::string> synthetic_vocab() {
  std::vector<std::string> vocab;
  for (int c = 0; c < 6; ++c)
    for (int k = 0; k < 10; ++k)
      vocab.push_back("w" + std::to_string(c) + "x" + std::to_string(k));
  for (int k = 0; k < 30; ++k) vocab.push_back("fill" + std::to_string(k));
  return vocab;
}

inline veracity::text::EmbeddingTable synthetic_table(std::size_t dim,
                                                      std::uint64_t seed) {
  auto vocab = synthetic_vocab();
  Rng rng(seed);
  std::vector<double> matrix(dim, 0.0);  // zero pad row
  for (std::size_t i = 0; i < vocab.size(); ++i)
    for (std::size_t k = 0; k < dim; ++k) matrix.push_back(rng.normal(0.0, 0.5));
  return veracity::text::EmbeddingTable(dim, std::move(vocab), std::move(matrix));
}

inline std::string class_token(int cls, Rng& rng, std::size_t variety = 10) {
  return "w" + std::to_string(cls) + "x" + std::to_string(rng.next_below(variety));
}

inline std::string filler_token(Rng& rng) {
  return "fill" + std::to_string(rng.next_below(30));
}

inline std::vector<Record> synthetic_records(const SyntheticSpec& spec,
                                             std::uint64_t seed) {
  Rng rng(seed);
  // speaker quality in [0,1]: high quality leans truthful
  std::vector<double> quality(spec.speakers);
  for (auto& q : quality) q = rng.next_unit();
  std::vector<Record> records;
  records.reserve(spec.records);
  const char* parties[] = {"red", "blue", "none"};
  const char* states[] = {"aa", "bb", "cc", "dd"};
  for (std::size_t i = 0; i < spec.records; ++i) {
    Record r;
    const int cls = static_cast<int>(i % 6);
    r.id = "r" + std::to_string(i);
    r.label = static_cast<LabelSix>(cls);
    // speakers biased by label group: truthful labels pick high-quality ones
    const bool truthful = cls >= 3;
    std::size_t sp = rng.next_below(spec.speakers);
    for (int tries = 0; tries < 4; ++tries) {
      const bool good = quality[sp] > 0.5;
      if (good == truthful) break;
      sp = rng.next_below(spec.speakers);
    }
    r.speaker = "speaker" + std::to_string(sp);
    std::ostringstream stmt;
    stmt << "Says";
    for (std::size_t t = 0; t < spec.statement_len; ++t)
      stmt << ' '
           << (rng.next_unit() < spec.class_token_rate
                   ? class_token(cls, rng, spec.class_token_variety)
                   : filler_token(rng));
    r.statement = stmt.str();
    r.subject = {std::string("topic") + std::to_string(rng.next_below(5))};
    if (rng.next_unit() > spec.missing_rate)
      r.job = "job" + std::to_string(rng.next_below(6));
    if (rng.next_unit() > spec.missing_rate)
      r.state = states[rng.next_below(4)];
    if (rng.next_unit() > spec.missing_rate)
      r.party = parties[rng.next_below(3)];
    if (rng.next_unit() > spec.missing_rate)
      r.context = "ctx" + std::to_string(rng.next_below(4));
    // histories: poor-quality speakers accumulate falsehood counts
    const double fakeness = 1.0 - quality[sp];
    const auto draw = [&](double weight) {
      return std::floor(rng.next_unit() * 6.0 * (0.25 + weight));
    };
    r.counts[0] = draw(fakeness * 0.8);        // barely-true
    r.counts[1] = draw(fakeness);              // false
    r.counts[2] = draw((1.0 - fakeness) * 0.9);  // half-true
    r.counts[3] = draw(1.0 - fakeness);          // mostly-true
    r.counts[4] = draw(fakeness * 1.2);          // pants-on-fire
    if (spec.liar_plus) {
      std::ostringstream just;
      just << "because";
      for (std::size_t t = 0; t < spec.justification_len; ++t)
        just << ' '
             << (rng.next_unit() < spec.just_token_rate
                     ? class_token(cls, rng, spec.class_token_variety)
                     : filler_token(rng));
      r.justification = just.str();
    }
    records.push_back(std::move(r));
  }
  return records;
}

// Trivially separable records: the statement's content token determines the
// binary class outright.
inline std::vector<Record> separable_records(std::size_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.records = n;
  spec.class_token_rate = 1.0;
  spec.just_token_rate = 1.0;
  spec.statement_len = 5;
  spec.justification_len = 5;
  spec.missing_rate = 0.0;
  spec.class_token_variety = 2;
  return synthetic_records(spec, seed);
}

}  // namespace testsupport
