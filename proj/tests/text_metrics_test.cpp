// Copyright 2026 The revfocus Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "revfocus/error.hpp"
#include "revfocus/text_metrics.hpp"

namespace revfocus {
namespace {

using testing::Rng;
using namespace oracle;

TEST(Tokenize, LowercasesAndDropsPunctuation) {
  EXPECT_EQ(tokenize("The cat, sat!  On-the (mat)."),
            (TokenSeq{"the", "cat", "sat", "on", "the", "mat"}));
  EXPECT_EQ(tokenize("**Header**: body"), (TokenSeq{"header", "body"}));
  EXPECT_TRUE(tokenize(" ,.;: !? ").empty());
}

TEST(Tokenize, KeepsWordInternalJoiners) {
  EXPECT_EQ(tokenize("don't stop"), (TokenSeq{"don't", "stop"}));
  EXPECT_EQ(tokenize("accuracy 93.5, 1,000 runs."),
            (TokenSeq{"accuracy", "93.5", "1,000", "runs"}));
  EXPECT_EQ(tokenize("'quoted'"), (TokenSeq{"quoted"}));
}

TEST(Tokenize, NonAscii) {
  EXPECT_EQ(tokenize("Über naïve ΑΒΓ — 日本語 😀"),
            (TokenSeq{"über", "naïve", "αβγ", "日本語"}));
  EXPECT_EQ(tokenize("a\xff" "b"), (TokenSeq{"a", "b"}));
}

TEST(Tokenize, IsDeterministic) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto s = testing::random_text(rng);
    EXPECT_EQ(tokenize(s), tokenize(s));
  }
}

TEST(RougeL, HandExample) {
  const auto c = tokenize("the cat sat on the mat");
  const auto r = tokenize("the cat lay on the mat");
  EXPECT_NEAR(rouge_l(c, r), 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(rouge_l(c, r), 0.8333, 1e-4);
}

TEST(RougeL, IdenticalAndDisjoint) {
  const auto c = tokenize("a b c d");
  EXPECT_EQ(rouge_l(c, c), 1.0);
  EXPECT_EQ(rouge_l(c, tokenize("x y")), 0.0);
  EXPECT_THROW(rouge_l({}, c), Error);
  EXPECT_THROW(rouge_l(c, {}), Error);
}

TEST(RougeLProperty, EqualsDpOracle) {
  Rng rng(8);
  for (int it = 0; it < 1000; ++it) {
    const auto c = testing::random_tokens(rng, 20);
    const auto r = testing::random_tokens(rng, 20);
    ASSERT_EQ(rouge_l(c, r), oracle_rouge(c, r));
  }
}

TEST(Bleu4, HandExample) {
  const auto c = tokenize("the cat sat on the mat");
  const auto r = tokenize("the cat sat on a mat");
  EXPECT_EQ(ngram_precision(c, r, 1).matches, 5u);
  EXPECT_EQ(ngram_precision(c, r, 2).matches, 3u);
  EXPECT_EQ(ngram_precision(c, r, 3).matches, 2u);
  EXPECT_EQ(ngram_precision(c, r, 4).matches, 1u);
  const double expected = std::pow(5.0 / 6.0 * 3.0 / 5.0 * 2.0 / 4.0 * 1.0 / 3.0, 0.25);
  EXPECT_NEAR(bleu_4(c, r), expected, 1e-12);
  EXPECT_NEAR(bleu_4(c, r), 0.5373, 1e-4);
}

TEST(Bleu4, IdenticalShortAndEmpty) {
  const auto c = tokenize("one two three four five");
  EXPECT_NEAR(bleu_4(c, c), 1.0, 1e-12);
  EXPECT_LT(bleu_4(tokenize("x y"), c), 1e-2);
  EXPECT_GE(bleu_4(tokenize("x y"), c), 0.0);
  EXPECT_THROW(bleu_4({}, c), Error);
}

TEST(Bleu4, BrevityPenalty) {
  const auto r = tokenize("a b c d e f g h");
  const auto c = tokenize("a b c d");
  EXPECT_NEAR(bleu_4(c, r), std::exp(1.0 - 8.0 / 4.0), 1e-12);
}

TEST(Bleu4Property, EqualsNaiveCounterOracle) {
  Rng rng(15);
  for (int it = 0; it < 1000; ++it) {
    const auto c = testing::random_tokens(rng, 15, 4);
    const auto r = testing::random_tokens(rng, 15, 4);
    ASSERT_NEAR(bleu_4(c, r), oracle_bleu(c, r), 1e-12);
  }
}

TEST(EmbedScore, Identical) {
  const std::vector<std::vector<double>> v = {{1, 0, 0}, {0, 2, 0}, {0.5, 0.5, 1}};
  const auto s = greedy_embed_score(v, v);
  EXPECT_NEAR(s.precision, 1.0, 1e-12);
  EXPECT_NEAR(s.recall, 1.0, 1e-12);
  EXPECT_NEAR(s.f1, 1.0, 1e-12);
}

TEST(EmbedScore, OrthogonalHandExample) {
  const std::vector<std::vector<double>> ref = {{1, 0}, {0, 1}};
  const std::vector<std::vector<double>> cand = {{1, 0}};
  const auto s = greedy_embed_score(cand, ref);
  EXPECT_NEAR(s.recall, 0.5, 1e-12);
  EXPECT_NEAR(s.precision, 1.0, 1e-12);
  EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-12);
}

TEST(EmbedScore, IdfWeighting) {
  const std::vector<std::vector<double>> ref = {{1, 0}, {0, 1}};
  const std::vector<std::vector<double>> cand = {{1, 0}};
  const auto s = greedy_embed_score(cand, ref, {{"a", 3.0}, {"b", 1.0}}, {"a"}, {"a", "b"});
  EXPECT_NEAR(s.recall, 0.75, 1e-12);
  EXPECT_THROW(greedy_embed_score(cand, {{0, 0}}), Error);
}

class DownBackend : public EmbeddingBackend {
 public:
  std::string id() const override { return "down"; }
  std::vector<std::vector<double>> embed(const TokenSeq&) override {
    throw Error(ErrorCode::kBackendUnavailable, "offline");
  }
};

TEST(EmbedScore, UnavailableBackendIsAbsent) {
  DownBackend down;
  EXPECT_FALSE(embed_score(&down, {"a"}, {"b"}).has_value());
  EXPECT_FALSE(embed_score(nullptr, {"a"}, {"b"}).has_value());
}

}  // namespace
}  // namespace revfocus
