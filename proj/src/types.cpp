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

#include "revfocus/types.hpp"

#include <cmath>
#include <numeric>

#include "revfocus/error.hpp"

namespace revfocus {

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::kAccepted: return "accepted";
    case Decision::kRejected: return "rejected";
    case Decision::kUnknown: return "unknown";
  }
  return "unknown";
}

Decision decision_from_id(std::string_view id) {
  if (id == "accepted") return Decision::kAccepted;
  if (id == "rejected") return Decision::kRejected;
  if (id == "unknown") return Decision::kUnknown;
  throw Error(ErrorCode::kUnknownLabel, "decision '" + std::string(id) + "'");
}

std::string_view to_string(DraftStage s) {
  switch (s) {
    case DraftStage::kMetaExtracted: return "meta_extracted";
    case DraftStage::kAugmented: return "augmented";
    case DraftStage::kParaphrased: return "paraphrased";
  }
  return "meta_extracted";
}

std::string_view to_string(ParseMode m) {
  return m == ParseMode::kStructured ? "structured" : "fallback_markdown";
}

std::string ReviewPoint::display_text() const {
  if (header && !header->empty()) return "**" + *header + "**: " + body;
  return body;
}

FocusDistribution::FocusDistribution(FacetKind kind, Polarity polarity)
    : kind_(kind), polarity_(polarity), weights_(vocabulary_size(kind), 0.0) {}

FocusDistribution FocusDistribution::from_counts(
    FacetKind kind, Polarity polarity, const std::vector<std::size_t>& counts) {
  if (counts.size() != vocabulary_size(kind)) {
    throw Error(ErrorCode::kInvalidArgument,
                "count vector does not match the vocabulary size");
  }
  FocusDistribution d(kind, polarity);
  d.support_ = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (d.support_ == 0) return d;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    d.weights_[i] = static_cast<double>(counts[i]) /
                    static_cast<double>(d.support_);
  }
  return d;
}

FocusDistribution FocusDistribution::from_weights(FacetKind kind,
                                                  Polarity polarity,
                                                  std::vector<double> weights,
                                                  std::size_t support) {
  if (weights.size() != vocabulary_size(kind)) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight vector does not match the vocabulary size");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "negative or non-finite weight");
    }
    sum += w;
  }
  const bool empty = support == 0 && sum == 0.0;
  if (!empty && std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "weights do not sum to 1");
  }
  FocusDistribution d(kind, polarity);
  d.weights_ = std::move(weights);
  d.support_ = support;
  return d;
}

const FocusDistribution& FocusProfile::at(FacetKind kind,
                                          Polarity polarity) const {
  const auto i = quadrant_index(kind, polarity);
  if (distributions.size() != 4) {
    throw Error(ErrorCode::kInvalidArgument,
                "profile '" + group_id + "' does not have four distributions");
  }
  return distributions[i];
}

}  // namespace revfocus
