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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "revfocus/extraction.hpp"
#include "revfocus/facets.hpp"
#include "revfocus/gateway.hpp"
#include "revfocus/prompts.hpp"
#include "revfocus/types.hpp"

namespace revfocus {

/// Assigns a target and an aspect to review points with two independent
/// calls per point, using the prompt for the point's polarity.
class Annotator {
 public:
  Annotator(ChatClient& client, const PromptSet& prompts, StageModel model,
            const SynonymTable& synonyms = SynonymTable::builtin());

  /// Throws kAnnotationFailed when a label stays unparseable after one
  /// stricter retry. Gateway errors propagate.
  AnnotatedPoint annotate_point(const ReviewPoint& point);

  /// Results are aligned with `points`; failures never abort the batch.
  std::vector<Result<AnnotatedPoint>> annotate_corpus(const std::vector<ReviewPoint>& points,
                                                      std::size_t parallelism);

  const std::string& annotator_id() const { return model_.output_id(); }

 private:
  std::pair<Facet, std::string> label(const ReviewPoint& point, FacetKind kind);

  ChatClient& client_;
  const PromptSet& prompts_;
  StageModel model_;
  const SynonymTable& synonyms_;
};

std::string annotation_prompt_name(FacetKind kind, Polarity polarity);

// --- agreement ---------------------------------------------------------------

struct KappaResult {
  double kappa = 0.0;
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  // p_e == 1: both raters constant and equal; kappa reported as 1.0.
  bool degenerate = false;
};

/// Cohen's kappa over integer category codes. Computed from integer counts
/// as (agree*n - sum(row*col)) / (n^2 - sum(row*col)), so one rounding step.
/// Throws kLengthMismatch on unequal or empty inputs.
KappaResult cohens_kappa_detail(std::span<const int> a, std::span<const int> b);

double cohens_kappa(std::span<const int> a, std::span<const int> b);
double cohens_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct GoldLabel {
  std::string point_id;
  TargetFacet human_target = TargetFacet::kPaper;
  AspectFacet human_aspect = AspectFacet::kNotSpecific;
};

/// Gold files share the annotations.jsonl layout with annotator_id "human".
std::vector<GoldLabel> gold_from_annotations(const std::vector<AnnotatedPoint>& annotations);

/// Dense [gold][predicted] counts with facet ids on both axes.
struct ConfusionMatrix {
  FacetKind kind = FacetKind::kTarget;
  std::vector<std::vector<std::size_t>> counts;
};

struct IrrReport {
  double kappa_target = 0.0;
  double kappa_aspect = 0.0;
  bool degenerate_target = false;
  bool degenerate_aspect = false;
  std::size_t n_items = 0;
  ConfusionMatrix target_confusion;
  ConfusionMatrix aspect_confusion;
};

/// Throws kMissingPrediction for the first gold point with no prediction.
IrrReport validate_annotator(const std::vector<GoldLabel>& gold,
                             const std::vector<AnnotatedPoint>& predicted);

json irr_report_json(const IrrReport& report);

}  // namespace revfocus
