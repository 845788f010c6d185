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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "revfocus/gateway.hpp"
#include "revfocus/prompts.hpp"
#include "revfocus/types.hpp"

namespace revfocus {

/// Which endpoint/model a stage talks to, with its decoding settings.
struct StageModel {
  std::string endpoint_id;
  std::string model_id;
  double temperature = 0.0;
  int max_output_tokens = 4096;
  // Name recorded on outputs when it differs from the provider's model name.
  std::string label;

  const std::string& output_id() const { return label.empty() ? model_id : label; }
};

/// Points read back from one chain-stage reply: {"points": [...]} inside a
/// fenced json block. Throws kParseFailed.
std::vector<DraftPoint> parse_draft_points(std::string_view raw, DraftStage stage);

/// Extracts the body of the first ```json (or bare ```) fence, or the whole
/// text when it is itself a JSON document.
std::optional<std::string> find_json_block(std::string_view raw);

/// False when text still names a reviewer or the meta-review.
bool passes_self_containment_screen(std::string_view text);

/// The three-prompt chain that turns a meta-review plus individual reviews
/// into self-contained expert strengths and weaknesses.
class ExpertChain {
 public:
  ExpertChain(ChatClient& client, const PromptSet& prompts, StageModel model);

  /// Throws kEmptyMetaReview, or kParseFailed after one stricter re-ask.
  std::vector<DraftPoint> extract_meta_points(std::string_view meta_review);

  /// Same cardinality and per-position polarity as `drafts`. With no
  /// individual reviews the drafts pass through with their stage bumped.
  /// Throws kCardinalityDrift after one retry.
  std::vector<DraftPoint> augment_points(const std::vector<DraftPoint>& drafts,
                                         const std::vector<IndividualReview>& reviews);

  /// Final expert points with fresh ids "<paper_id>:expert:<n>". Empty input
  /// makes no call. Throws kCardinalityDrift, or kParseFailed when references
  /// to reviewers survive one retry.
  std::vector<ReviewPoint> paraphrase_points(const std::vector<DraftPoint>& drafts,
                                             const std::string& paper_id);

  struct Outcome {
    std::string paper_id;
    std::vector<ReviewPoint> points;
    std::optional<ErrorInfo> excluded;  // set when the paper was dropped
  };

  /// Runs all three stages for one paper. Failures exclude the paper instead
  /// of throwing.
  Outcome run(const ReviewBundle& bundle);

 private:
  std::vector<DraftPoint> ask_points(std::vector<ChatMessage> messages,
                                     DraftStage stage,
                                     const std::vector<DraftPoint>* reference);

  ChatClient& client_;
  const PromptSet& prompts_;
  StageModel model_;
};

struct ParsedReview {
  std::vector<ReviewPoint> points;
  ParseMode mode = ParseMode::kStructured;
};

/// Structured fenced block first, then "Strengths"/"Weaknesses" markdown
/// sections split on top-level bullets. Throws kParseFailed.
ParsedReview parse_review_points(std::string_view raw_text,
                                 const std::string& paper_id,
                                 const Origin& origin);

struct GenerationOptions {
  // Whitespace-token budget for the paper body inside the prompt.
  std::size_t max_paper_tokens = 24000;
};

/// Truncates to the first `budget` whitespace tokens, keeping the original
/// spacing. Returns the input unchanged when within budget.
std::string truncate_to_tokens(std::string_view text, std::size_t budget,
                               std::size_t* original_tokens = nullptr);

/// One generation call; raw text kept verbatim. A parse failure sets
/// parse_failed instead of throwing. Gateway errors propagate.
GeneratedReview generate_review(ChatClient& client, const PromptSet& prompts,
                                const PaperRecord& paper, const StageModel& model,
                                const GenerationOptions& options = {});

}  // namespace revfocus
