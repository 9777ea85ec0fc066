#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "veracity/rng.hpp"
#include "veracity/stopwords.hpp"

namespace veracity::text {

inline constexpr std::size_t kPadIndex = 0;

namespace detail {

inline bool is_space(unsigned char c) { return std::isspace(c) != 0; }
inline bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace detail

// Lowercased whitespace tokens, leading/trailing punctuation stripped,
// stop words removed. Intra-token hyphens, digits and apostrophes survive
// ("covid-19", "aren't"). ASCII-only normalization; other bytes pass through.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && detail::is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !detail::is_space(s[i])) ++i;
    if (i == start) break;
    std::string_view raw = s.substr(start, i - start);
    std::size_t b = 0, e = raw.size();
    while (b < e && detail::is_punct(raw[b])) ++b;
    while (e > b && detail::is_punct(raw[e - 1])) --e;
    if (b == e) continue;
    std::string tok(raw.substr(b, e - b));
    for (auto& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (is_stop_word(tok)) continue;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

// Pretrained token -> vector map. Row 0 of the matrix is the all-zero
// padding vector; stored tokens occupy rows 1..vocab_size in file order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dim, std::vector<std::string> tokens,
                 std::vector<double> matrix)
      : dim_(dim), tokens_(std::move(tokens)), matrix_(std::move(matrix)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) vocab_[tokens_[i]] = i + 1;
  }

  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return tokens_.size(); }
  std::size_t rows() const { return tokens_.size() + 1; }

  std::optional<std::size_t> lookup(std::string_view token) const {
    auto it = vocab_.find(std::string(token));
    if (it == vocab_.end()) return std::nullopt;
    return it->second;
  }

  const double* row(std::size_t index) const { return matrix_.data() + index * dim_; }
  const std::vector<double>& matrix() const { return matrix_; }
  std::vector<double>& mutable_matrix() { return matrix_; }
  const std::string& token(std::size_t row_index) const { return tokens_.at(row_index - 1); }

  std::uint64_t content_hash() const {
    std::uint64_t h = fnv1a64({reinterpret_cast<const char*>(matrix_.data()),
                               matrix_.size() * sizeof(double)});
    for (const auto& t : tokens_) h = splitmix64(h ^ fnv1a64(t));
    return h;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<double> matrix_;  // rows() x dim_, row 0 zero
};

// Plain-text embedding file: one entry per line, token then `dim`
// space-separated decimal reals, no header.
inline EmbeddingTable load_embeddings(std::istream& in, std::size_t dim) {
  std::vector<std::string> tokens;
  std::vector<double> matrix(dim, 0.0);  // zero padding row
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t pos = line.find(' ');
    if (pos == std::string::npos || pos == 0)
      throw std::runtime_error("embedding line " + std::to_string(line_no) +
                               ": expected 'token v1 ... v" + std::to_string(dim) + "'");
    std::string token = line.substr(0, pos);
    if (!seen.emplace(token, line_no).second)
      throw std::runtime_error("embedding line " + std::to_string(line_no) +
                               ": duplicate token '" + token + "'");
    std::size_t count = 0;
    const char* p = line.data() + pos;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{})
        throw std::runtime_error("embedding line " + std::to_string(line_no) +
                                 ": malformed component after token '" + token + "'");
      ++count;
      if (count <= dim) matrix.push_back(v);
      p = next;
    }
    if (count != dim)
      throw std::runtime_error("embedding line " + std::to_string(line_no) +
                               ": expected " + std::to_string(dim) +
                               " components, got " + std::to_string(count));
    tokens.push_back(std::move(token));
  }
  return EmbeddingTable(dim, std::move(tokens), std::move(matrix));
}

inline EmbeddingTable load_embeddings(const std::string& path, std::size_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  return load_embeddings(in, dim);
}

struct EncodedSequence {
  std::vector<std::size_t> indices;  // length max_len, padded with kPadIndex
  std::size_t true_length = 0;
};

// Map tokens to table indices, dropping out-of-vocabulary tokens; keep the
// head of the sequence up to max_len and post-pad with the padding index.
inline EncodedSequence encode(const std::vector<std::string>& tokens,
                              const EmbeddingTable& table, std::size_t max_len) {
  if (max_len < 1) throw std::invalid_argument("encode requires max_len >= 1");
  EncodedSequence seq;
  seq.indices.assign(max_len, kPadIndex);
  for (const auto& tok : tokens) {
    if (seq.true_length == max_len) break;
    if (auto idx = table.lookup(tok)) seq.indices[seq.true_length++] = *idx;
  }
  return seq;
}

inline std::size_t in_vocab_length(const std::vector<std::string>& tokens,
                                   const EmbeddingTable& table) {
  std::size_t n = 0;
  for (const auto& tok : tokens)
    if (table.lookup(tok)) ++n;
  return n;
}

// Mean of the given sequence lengths, rounded to nearest, never below 1.
inline std::size_t average_length(const std::vector<std::size_t>& lengths) {
  if (lengths.empty())
    throw std::invalid_argument("average length of an empty corpus");
  double sum = 0;
  for (auto n : lengths) sum += static_cast<double>(n);
  auto mean = std::llround(sum / static_cast<double>(lengths.size()));
  return mean < 1 ? 1 : static_cast<std::size_t>(mean);
}

inline std::size_t average_length(const std::vector<std::vector<std::string>>& corpus,
                                  const EmbeddingTable& table) {
  if (corpus.empty())
    throw std::invalid_argument("average length of an empty corpus");
  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.size());
  for (const auto& tokens : corpus) lengths.push_back(in_vocab_length(tokens, table));
  return average_length(lengths);
}

}  // namespace veracity::text
