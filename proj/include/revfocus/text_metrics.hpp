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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revfocus {

using TokenSeq = std::vector<std::string>;

inline constexpr std::string_view kTokenizerVersion = "uniword-1";

/// Lowercased word segments. Letters, digits and marks from any script form
/// words; an apostrophe between letters and a point or comma between digits
/// stay inside the word; everything else separates.
TokenSeq tokenize(std::string_view text);

/// LCS-based F-measure with beta = 1. Throws kEmptyText.
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

inline constexpr double kBleuSmoothing = 1e-9;

/// Sentence BLEU over n = 1..4 with uniform weights and the brevity penalty.
/// A zero match count becomes kBleuSmoothing; an order longer than the
/// candidate has precision kBleuSmoothing. Throws kEmptyText.
double bleu_4(const TokenSeq& candidate, const TokenSeq& reference);

/// Clipped n-gram matches and candidate n-gram count.
struct NgramPrecision {
  std::size_t matches = 0;
  std::size_t total = 0;
};
NgramPrecision ngram_precision(const TokenSeq& candidate, const TokenSeq& reference,
                               std::size_t n);

struct EmbedScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Greedy cosine matching of token embeddings. `cand_tokens`/`ref_tokens`
/// name the tokens behind each vector for idf lookup; an empty idf map means
/// uniform weights and unknown tokens weigh 1. Throws kEmptyText on empty
/// sides and kInvalidArgument on zero vectors or length mismatches.
EmbedScore greedy_embed_score(const std::vector<std::vector<double>>& cand,
                              const std::vector<std::vector<double>>& ref,
                              const std::map<std::string, double>& idf = {},
                              const TokenSeq& cand_tokens = {},
                              const TokenSeq& ref_tokens = {});

/// Supplies one vector per token. Implementations live outside the library.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string id() const = 0;
  /// Throws kBackendUnavailable when the backend cannot serve.
  virtual std::vector<std::vector<double>> embed(const TokenSeq& tokens) = 0;
};

/// Absent when the backend is missing or unavailable; never a fabricated value.
std::optional<EmbedScore> embed_score(EmbeddingBackend* backend, const TokenSeq& candidate,
                                      const TokenSeq& reference,
                                      const std::map<std::string, double>& idf = {});

}  // namespace revfocus
