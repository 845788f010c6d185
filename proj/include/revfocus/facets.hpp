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
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace revfocus {

/// What a review point talks about.
enum class TargetFacet : std::uint8_t {
  kProblem,
  kPriorResearch,
  kMethod,
  kTheory,
  kExperiment,
  kConclusion,
  kPaper,
};

/// Which criterion a review point applies to its target.
enum class AspectFacet : std::uint8_t {
  kImpact,
  kNovelty,
  kClarity,
  kValidity,
  kNotSpecific,
};

enum class Polarity : std::uint8_t { kStrength, kWeakness };

enum class FacetKind : std::uint8_t { kTarget, kAspect };

inline constexpr std::array<TargetFacet, 7> kAllTargets = {
    TargetFacet::kProblem,    TargetFacet::kPriorResearch,
    TargetFacet::kMethod,     TargetFacet::kTheory,
    TargetFacet::kExperiment, TargetFacet::kConclusion,
    TargetFacet::kPaper};

inline constexpr std::array<AspectFacet, 5> kAllAspects = {
    AspectFacet::kImpact, AspectFacet::kNovelty, AspectFacet::kClarity,
    AspectFacet::kValidity, AspectFacet::kNotSpecific};

inline constexpr std::array<Polarity, 2> kAllPolarities = {
    Polarity::kStrength, Polarity::kWeakness};

inline constexpr std::array<FacetKind, 2> kAllFacetKinds = {
    FacetKind::kTarget, FacetKind::kAspect};

constexpr std::size_t vocabulary_size(FacetKind kind) {
  return kind == FacetKind::kTarget ? kAllTargets.size() : kAllAspects.size();
}

// Canonical lowercase snake identifiers, fixed by the dataset schema.
std::string_view to_string(TargetFacet f);
std::string_view to_string(AspectFacet f);
std::string_view to_string(Polarity p);
std::string_view to_string(FacetKind k);

// Human-facing names ("Prior Research", "Not-specific").
std::string_view display_name(TargetFacet f);
std::string_view display_name(AspectFacet f);

// Strict parsers for canonical identifiers; throw Error(kUnknownLabel).
TargetFacet target_from_id(std::string_view id);
AspectFacet aspect_from_id(std::string_view id);
Polarity polarity_from_id(std::string_view id);
FacetKind facet_kind_from_id(std::string_view id);

/// A facet of either kind, indexed densely within its vocabulary.
using Facet = std::variant<TargetFacet, AspectFacet>;

std::size_t facet_index(const Facet& f);
std::string_view facet_id(const Facet& f);
Facet facet_at(FacetKind kind, std::size_t index);

/// Maps normalized free text onto facets. The built-in table is the same data
/// as data/facet_synonyms.json; load() swaps in a different versioned file.
class SynonymTable {
 public:
  static const SynonymTable& builtin();
  static SynonymTable load(const std::filesystem::path& path);
  static SynonymTable from_json_text(std::string_view text);

  const std::string& version() const { return version_; }

  // Returns the facet for an already-normalized key, if any.
  const TargetFacet* find_target(const std::string& key) const;
  const AspectFacet* find_aspect(const std::string& key) const;

 private:
  std::string version_;
  std::map<std::string, TargetFacet> targets_;
  std::map<std::string, AspectFacet> aspects_;
};

// Lowercases, drops punctuation, and collapses whitespace/underscores/hyphens
// to single spaces: "  Not-Specific." -> "not specific".
std::string normalize_label(std::string_view raw);

/// Lenient parse of annotator output onto the closed vocabulary.
/// Throws Error(kUnknownLabel) when nothing matches; never coerces.
Facet parse_facet(FacetKind kind, std::string_view raw,
                  const SynonymTable& table = SynonymTable::builtin());

}  // namespace revfocus
