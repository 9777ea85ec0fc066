#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "support.hpp"
#include "veracity/text.hpp"

using namespace veracity;
using namespace veracity::text;

TEST_CASE("tokenize lowercases, strips punctuation and drops stop words",
          "[text]") {
  CHECK(tokenize("The Cat sat.") == std::vector<std::string>{"cat", "sat"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("Says the ECONOMY grew") ==
        std::vector<std::string>{"says", "economy", "grew"});
  CHECK(tokenize("Covid-19 cases, \"doubled\"!") ==
        std::vector<std::string>{"covid-19", "cases", "doubled"});
  CHECK(tokenize("... --- !!!").empty());
}

TEST_CASE("tokenize is idempotent on its own output", "[text]") {
  Rng rng(4);
  testsupport::SyntheticSpec spec;
  spec.records = 50;
  for (const auto& r : testsupport::synthetic_records(spec, 19)) {
    const auto once = tokenize(r.statement);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    CHECK(tokenize(joined) == once);
  }
}

TEST_CASE("embedding loader builds the padded table", "[text]") {
  std::istringstream in("alpha 1 2 3\nbeta 0.5 -0.25 4e-1\n");
  const auto table = load_embeddings(in, 3);
  CHECK(table.dim() == 3);
  CHECK(table.vocab_size() == 2);
  CHECK(table.rows() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(table.row(0)[k] == 0.0);
  REQUIRE(table.lookup("alpha").has_value());
  CHECK(*table.lookup("alpha") == 1);
  CHECK(table.row(2)[2] == Catch::Approx(0.4));
  CHECK_FALSE(table.lookup("gamma").has_value());
}

TEST_CASE("embedding loader rejects malformed lines", "[text]") {
  SECTION("wrong component count") {
    std::istringstream in("alpha 1 2 3\nbeta 1 2\n");
    CHECK_THROWS_WITH(load_embeddings(in, 3),
                      Catch::Matchers::ContainsSubstring("line 2"));
  }
  SECTION("duplicate token") {
    std::istringstream in("alpha 1 2 3\nalpha 4 5 6\n");
    CHECK_THROWS_WITH(load_embeddings(in, 3),
                      Catch::Matchers::ContainsSubstring("duplicate"));
  }
  SECTION("non-numeric component") {
    std::istringstream in("alpha 1 x 3\n");
    CHECK_THROWS_AS(load_embeddings(in, 3), std::runtime_error);
  }
}

TEST_CASE("encode pads, truncates and drops out-of-vocabulary tokens",
          "[text]") {
  std::istringstream in(
      "a 1\nb 2\nc 3\nd 4\ne 5\nf 6\ng 7\n");
  const auto table = load_embeddings(in, 1);
  SECTION("padding") {
    const auto seq = encode({"a", "b", "c"}, table, 5);
    CHECK(seq.true_length == 3);
    CHECK(seq.indices == std::vector<std::size_t>{1, 2, 3, 0, 0});
  }
  SECTION("truncation keeps the head") {
    const auto seq = encode({"a", "b", "c", "d", "e", "f", "g"}, table, 5);
    CHECK(seq.true_length == 5);
    CHECK(seq.indices == std::vector<std::size_t>{1, 2, 3, 4, 5});
  }
  SECTION("all tokens out of vocabulary") {
    const auto seq = encode({"x", "y", "z"}, table, 4);
    CHECK(seq.true_length == 0);
    CHECK(seq.indices == std::vector<std::size_t>{0, 0, 0, 0});
  }
  SECTION("out-of-vocabulary tokens are dropped, not substituted") {
    const auto seq = encode({"a", "zz", "b"}, table, 4);
    CHECK(seq.true_length == 2);
    CHECK(seq.indices[0] == 1);
    CHECK(seq.indices[1] == 2);
  }
}

TEST_CASE("encoded indices stay inside the table and round-trip", "[text]") {
  const auto table = testsupport::synthetic_table(8, 2);
  testsupport::SyntheticSpec spec;
  spec.records = 60;
  for (const auto& r : testsupport::synthetic_records(spec, 23)) {
    const auto tokens = tokenize(r.statement);
    const auto seq = encode(tokens, table, 6);
    for (auto idx : seq.indices) CHECK(idx <= table.vocab_size());
    // decoding the first true_length indices and re-encoding is the identity
    std::vector<std::string> decoded;
    for (std::size_t t = 0; t < seq.true_length; ++t)
      decoded.push_back(table.token(seq.indices[t]));
    const auto seq2 = encode(decoded, table, 6);
    CHECK(seq2.indices == seq.indices);
    CHECK(seq2.true_length == seq.true_length);
  }
}

TEST_CASE("average length rounds the mean and never drops below one",
          "[text]") {
  CHECK(average_length(std::vector<std::size_t>{2, 4}) == 3);
  CHECK(average_length(std::vector<std::size_t>{3}) == 3);
  CHECK(average_length(std::vector<std::size_t>{0, 0, 1}) == 1);
  CHECK_THROWS_AS(average_length(std::vector<std::size_t>{}),
                  std::invalid_argument);
  SECTION("the corpus overload counts only in-vocabulary tokens") {
    std::istringstream in("a 1\nb 2\n");
    const auto table = load_embeddings(in, 1);
    const std::vector<std::vector<std::string>> corpus{
        {"a", "zz", "b"},  // 2 in vocabulary
        {"a", "a", "a", "b"},  // 4
    };
    CHECK(average_length(corpus, table) == 3);
    CHECK_THROWS_AS(average_length({}, table), std::invalid_argument);
  }
}
