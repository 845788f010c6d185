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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "revfocus/facets.hpp"

namespace revfocus {

enum class Decision : std::uint8_t { kAccepted, kRejected, kUnknown };

std::string_view to_string(Decision d);
Decision decision_from_id(std::string_view id);

struct PaperRecord {
  std::string paper_id;
  std::string title;
  int venue_year = 0;
  Decision decision = Decision::kUnknown;
  std::string body_text;
  std::map<std::string, std::string> source_meta;

  bool operator==(const PaperRecord&) const = default;
};

struct IndividualReview {
  std::string reviewer_id;
  std::string text;

  bool operator==(const IndividualReview&) const = default;
};

struct ReviewBundle {
  std::string paper_id;
  std::string meta_review;
  std::vector<IndividualReview> individual_reviews;

  bool operator==(const ReviewBundle&) const = default;
};

/// Who wrote a point: the expert pipeline, or a named model.
struct Origin {
  std::optional<std::string> model_id;  // nullopt means Expert

  static Origin expert() { return {}; }
  static Origin model(std::string id) { return {std::move(id)}; }

  bool is_expert() const { return !model_id.has_value(); }
  // "human" for experts, else the model id. Used as the focus group id.
  std::string group_id() const { return model_id.value_or("human"); }

  bool operator==(const Origin&) const = default;
};

struct ReviewPoint {
  std::string point_id;
  std::string paper_id;
  Polarity polarity = Polarity::kStrength;
  std::optional<std::string> header;
  std::string body;
  Origin origin;

  // "**header**: body" when a header exists. This is what annotators see.
  std::string display_text() const;

  bool operator==(const ReviewPoint&) const = default;
};

struct AnnotatedPoint {
  ReviewPoint point;
  TargetFacet target = TargetFacet::kPaper;
  AspectFacet aspect = AspectFacet::kNotSpecific;
  std::string annotator_id;
  std::string raw_annotator_output;

  bool operator==(const AnnotatedPoint&) const = default;
};

/// Normalized facet frequencies for one (kind, polarity) slice.
/// Zero support is representable (all weights 0) but metrics reject it.
class FocusDistribution {
 public:
  FocusDistribution() : FocusDistribution(FacetKind::kTarget, Polarity::kStrength) {}
  FocusDistribution(FacetKind kind, Polarity polarity);

  // Builds from raw counts indexed by facet_index(); normalizes.
  static FocusDistribution from_counts(FacetKind kind, Polarity polarity,
                                       const std::vector<std::size_t>& counts);
  // Builds from explicit weights; throws kInvalidArgument unless they are
  // non-negative and sum to 1 within 1e-9.
  static FocusDistribution from_weights(FacetKind kind, Polarity polarity,
                                        std::vector<double> weights,
                                        std::size_t support);

  FacetKind kind() const { return kind_; }
  Polarity polarity() const { return polarity_; }
  std::size_t support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(const Facet& f) const { return weights_.at(facet_index(f)); }

  bool operator==(const FocusDistribution&) const = default;

 private:
  FacetKind kind_;
  Polarity polarity_;
  std::vector<double> weights_;
  std::size_t support_ = 0;
};

/// The four distributions (strength/weakness x target/aspect) of one group.
struct FocusProfile {
  std::string group_id;
  // Indexed by quadrant_index(kind, polarity).
  std::vector<FocusDistribution> distributions;

  static constexpr std::size_t quadrant_index(FacetKind kind,
                                              Polarity polarity) {
    return static_cast<std::size_t>(kind) * 2 +
           static_cast<std::size_t>(polarity);
  }

  const FocusDistribution& at(FacetKind kind, Polarity polarity) const;

  bool operator==(const FocusProfile&) const = default;
};

enum class DraftStage : std::uint8_t { kMetaExtracted, kAugmented, kParaphrased };

std::string_view to_string(DraftStage s);

/// Intermediate point inside the expert extraction chain.
struct DraftPoint {
  Polarity polarity = Polarity::kStrength;
  std::string text;
  DraftStage stage = DraftStage::kMetaExtracted;

  bool operator==(const DraftPoint&) const = default;
};

enum class ParseMode : std::uint8_t { kStructured, kFallbackMarkdown };

std::string_view to_string(ParseMode m);

struct GeneratedReview {
  std::string paper_id;
  std::string model_id;
  std::string raw_text;
  std::vector<ReviewPoint> parsed;
  std::optional<ParseMode> parse_mode;  // nullopt when parsing failed
  bool parse_failed = false;
  std::string prompt_manifest_hash;
  std::map<std::string, std::string> source_meta;

  bool operator==(const GeneratedReview&) const = default;
};

}  // namespace revfocus
