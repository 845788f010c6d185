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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "revfocus/error.hpp"
#include "revfocus/types.hpp"

namespace revfocus {

inline constexpr double kDefaultSmoothing = 1e-6;

/// Relative facet frequencies of the points with `polarity`.
/// Throws kEmptySupport when no point matches.
FocusDistribution focus_distribution(const std::vector<AnnotatedPoint>& points,
                                     FacetKind kind, Polarity polarity);

/// Same, but returns the all-zero distribution instead of throwing.
FocusDistribution focus_distribution_or_empty(const std::vector<AnnotatedPoint>& points,
                                              FacetKind kind, Polarity polarity);

/// All four distributions of one reviewer group.
FocusProfile focus_profile(std::string group_id, const std::vector<AnnotatedPoint>& points);

/// KL(p || q) in nats after adding epsilon to every weight of both sides and
/// renormalizing. Throws kKindMismatch, kEmptySupport, kInvalidArgument.
double kl_divergence(const FocusDistribution& p, const FocusDistribution& q,
                     double epsilon = kDefaultSmoothing);

/// The same computation over raw weight vectors.
double smoothed_kl(std::span<const double> p, std::span<const double> q, double epsilon);

enum class KlDirection { kHumanToModel, kModelToHuman };

std::string_view to_string(KlDirection d);
KlDirection kl_direction_from_id(std::string_view id);

struct FocusKl {
  // Indexed by FocusProfile::quadrant_index(kind, polarity).
  std::array<double, 4> by_quadrant{};
  double average = 0.0;
};

/// Mean of the four quadrant KLs between two complete profiles.
FocusKl avg_focus_kl(const FocusProfile& human, const FocusProfile& model,
                     double epsilon = kDefaultSmoothing,
                     KlDirection direction = KlDirection::kHumanToModel);

// --- (target, aspect) agreement ------------------------------------------------

using FacetPair = std::pair<TargetFacet, AspectFacet>;

/// Multiset of annotated pairs for one paper, split by polarity.
struct PairSet {
  std::string paper_id;
  std::array<std::map<FacetPair, std::size_t>, 2> by_polarity;

  std::map<FacetPair, std::size_t>& at(Polarity p) {
    return by_polarity[static_cast<std::size_t>(p)];
  }
  const std::map<FacetPair, std::size_t>& at(Polarity p) const {
    return by_polarity[static_cast<std::size_t>(p)];
  }
  std::size_t total(Polarity p) const;
  void add(Polarity p, FacetPair pair, std::size_t count = 1);
};

/// Groups annotated points (of one origin) into per-paper pair sets, sorted
/// by paper_id.
std::vector<PairSet> build_pair_sets(const std::vector<AnnotatedPoint>& points);

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  bool operator==(const F1Result&) const = default;
};

F1Result f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

/// kMultiset keeps repeated pairs; kSet collapses each side to distinct pairs
/// first (sensitivity analysis).
enum class MatchMode { kMultiset, kSet };

std::string_view to_string(MatchMode m);
MatchMode match_mode_from_id(std::string_view id);

/// Micro-averaged agreement: per paper tp = sum of min(ref, cand) counts,
/// summed over papers. A paper present on one side only adds fp or fn mass.
F1Result pair_multiset_f1(const std::vector<PairSet>& reference,
                          const std::vector<PairSet>& candidate,
                          std::optional<Polarity> polarity = std::nullopt,
                          MatchMode mode = MatchMode::kMultiset);

/// Per-paper F1 averaged over the papers of the union (macro variant).
double pair_macro_f1(const std::vector<PairSet>& reference,
                     const std::vector<PairSet>& candidate,
                     std::optional<Polarity> polarity = std::nullopt,
                     MatchMode mode = MatchMode::kMultiset);

/// How per-label agreement decides a match.
///  kProjected: pairs are reduced to the chosen axis, then matched.
///  kPairAttributed: full pairs are matched, then tp/fp/fn are attributed to
///  the label on the chosen axis.
enum class LabelMatch { kProjected, kPairAttributed };

std::string_view to_string(LabelMatch m);
LabelMatch label_match_from_id(std::string_view id);

/// One F1Result per facet of `axis`, indexed by facet_index().
std::vector<F1Result> per_label_f1(const std::vector<PairSet>& reference,
                                   const std::vector<PairSet>& candidate, FacetKind axis,
                                   std::optional<Polarity> polarity = std::nullopt,
                                   LabelMatch match = LabelMatch::kProjected,
                                   MatchMode mode = MatchMode::kMultiset);

// --- point counts ------------------------------------------------------------

/// Adds with Neumaier compensation so the sum does not depend on order.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct CountStats {
  std::string group_id;
  std::size_t n_papers = 0;
  double mean_strengths = 0.0;
  double mean_weaknesses = 0.0;
  double mean_total = 0.0;
  // points-per-paper -> number of papers
  std::map<std::size_t, std::size_t> strength_histogram;
  std::map<std::size_t, std::size_t> weakness_histogram;
  std::map<std::size_t, std::size_t> total_histogram;
};

/// Per origin group (sorted by group id, "human" for experts).
std::vector<CountStats> count_stats(const std::vector<ReviewPoint>& points);

/// Every model group pooled: one sample per (model, paper).
CountStats pooled_model_count_stats(const std::vector<ReviewPoint>& points);

struct LengthStats {
  std::size_t n_reviews = 0;
  double mean_chars = 0.0;
  double mean_whitespace_tokens = 0.0;
};

LengthStats length_stats(const std::vector<std::string>& texts);

}  // namespace revfocus
