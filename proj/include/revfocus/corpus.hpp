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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "revfocus/serialize.hpp"
#include "revfocus/stage_io.hpp"
#include "revfocus/types.hpp"

namespace revfocus {

enum class ExportSchema { kOpenReviewV1, kGeneric };

ExportSchema export_schema_from_id(std::string_view id);

/// Where each logical field lives in one OpenReview export record. Paths are
/// dot-separated; list-valued entries are tried in order and every present
/// field is joined with a blank line.
struct ExportFields {
  std::string paper_id = "id";
  std::string title = "title";
  std::string decision = "decision";
  std::vector<std::string> meta_review = {"meta_review"};
  std::string reviews = "reviews";
  std::string reviewer_id = "reviewer_id";
  std::vector<std::string> review_text = {"review"};
  std::string body_text = "paper_text";
};

/// Per-year field layout for OpenReview exports; loaded from configuration
/// (config/openreview_keys.json) so new venues need no rebuild.
class ExportKeyMap {
 public:
  static ExportKeyMap from_json(const json& doc);
  static ExportKeyMap load(const std::filesystem::path& path);

  const std::string& year_field() const { return year_field_; }
  const ExportFields& fields_for(std::optional<int> year) const;

 private:
  std::string year_field_ = "year";
  ExportFields defaults_;
  std::map<int, ExportFields> per_year_;
};

struct LoadOptions {
  ExportSchema schema = ExportSchema::kGeneric;
  bool strict = false;
  // Required for kOpenReviewV1.
  const ExportKeyMap* key_map = nullptr;
};

struct LoadResult {
  std::vector<PaperRecord> papers;
  std::vector<ReviewBundle> bundles;
  // 1-based line numbers that failed to parse (non-strict mode only).
  std::vector<std::size_t> malformed_lines;
  // Papers kept for generation but excluded from expert extraction.
  std::vector<std::string> missing_meta_review;
};

/// Reads a line-delimited export: one submission object per line.
/// Throws kIo, or kMalformedRecord in strict mode.
LoadResult load_export(const std::filesystem::path& path,
                       const LoadOptions& options);
LoadResult load_export_text(std::string_view text, const LoadOptions& options);

/// "Reject", "Accept (Poster)", ... -> {Accepted, Rejected, Unknown}.
Decision normalize_decision(std::string_view text);

std::vector<PaperRecord> filter_decision(const std::vector<PaperRecord>& papers,
                                         const std::set<Decision>& keep);

std::vector<PaperRecord> filter_years(const std::vector<PaperRecord>& papers,
                                      std::optional<int> min_year,
                                      std::optional<int> max_year);

/// round-half-up(fraction * n). Throws kInvalidFraction outside (0, 1].
std::size_t sample_size(std::size_t n, double fraction);

/// Seeded Fisher-Yates shuffle, keep the first sample_size() records, sort by
/// paper_id. Depends only on (input order, fraction, seed).
std::vector<PaperRecord> sample(const std::vector<PaperRecord>& papers,
                                double fraction, std::uint64_t seed);

struct CorpusManifest {
  std::vector<std::string> source_paths;
  std::optional<int> year_min;
  std::optional<int> year_max;
  std::vector<Decision> decision_filter;
  double sample_fraction = 1.0;
  std::uint64_t sample_seed = 0;
  std::map<std::string, StageEntry> stages;
  // Per-stage settings and loss counts written by the CLI.
  json runs = json::object();

  static CorpusManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

void to_json(json& j, const StageEntry& e);
void from_json(const json& j, StageEntry& e);
void to_json(json& j, const CorpusManifest& m);
void from_json(const json& j, CorpusManifest& m);

}  // namespace revfocus
