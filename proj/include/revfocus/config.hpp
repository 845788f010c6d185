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

#include "revfocus/corpus.hpp"
#include "revfocus/extraction.hpp"
#include "revfocus/gateway.hpp"
#include "revfocus/metrics.hpp"

namespace revfocus {

/// Flat "key = value" lines; '#' starts a comment. Later keys win.
/// Throws kConfigError naming the offending line.
std::map<std::string, std::string> parse_key_values(std::string_view text,
                                                    const std::string& origin = "<config>");

/// Where the reference text for text similarity comes from is fixed (expert
/// points joined); the candidate is either the raw model text or its parsed
/// points rendered the same way as the reference.
enum class TextCandidate { kRawText, kParsedPoints };

std::string_view to_string(TextCandidate c);
TextCandidate text_candidate_from_id(std::string_view id);

struct ModelEntry {
  std::string id;
  std::string endpoint_id;
  // Name sent to the provider; defaults to the id.
  std::string provider_model;
};

struct RunConfig {
  std::filesystem::path run_dir = "run";

  // corpus
  std::vector<std::filesystem::path> exports;
  ExportSchema schema = ExportSchema::kGeneric;
  std::optional<std::filesystem::path> key_map;
  bool strict = false;
  std::optional<int> year_min;
  std::optional<int> year_max;
  std::set<Decision> decisions;  // empty: keep all
  double sample_fraction = 1.0;
  std::optional<std::uint64_t> sample_seed;

  // llm
  std::filesystem::path prompts_dir = "prompts";
  std::optional<std::filesystem::path> cache_dir;
  bool offline = false;
  std::map<std::string, EndpointConfig> endpoints;
  std::map<std::string, ModelEntry> models;
  std::vector<std::string> review_models;  // models asked to write reviews
  std::optional<std::string> expert_model;
  std::optional<std::string> annotator_model;
  double expert_temperature = 0.0;
  double generation_temperature = 1.0;
  double annotation_temperature = 0.0;
  int max_output_tokens = 4096;
  std::size_t max_paper_tokens = 24000;
  std::size_t parallelism = 4;

  // irr
  std::optional<std::filesystem::path> gold_labels;
  std::optional<double> kappa_floor;

  // metrics
  double epsilon = kDefaultSmoothing;
  KlDirection kl_direction = KlDirection::kHumanToModel;
  MatchMode match_mode = MatchMode::kMultiset;
  LabelMatch label_match = LabelMatch::kProjected;
  TextCandidate text_candidate = TextCandidate::kRawText;

  // Fraction of items a stage may lose before the run fails.
  double loss_threshold = 0.05;

  /// Unknown keys are rejected. Relative paths resolve against `base_dir`.
  static RunConfig from_key_values(const std::map<std::string, std::string>& kv,
                                   const std::filesystem::path& base_dir = ".");
  static RunConfig load(const std::filesystem::path& path,
                        const std::map<std::string, std::string>& overrides = {});

  /// Structural checks that need no files: every model maps to a configured
  /// endpoint, ranges are sane. Throws kConfigError.
  void validate() const;
  /// Files a command reads must exist. Throws kConfigError.
  void require_path(const std::filesystem::path& p, const std::string& what) const;

  /// Throws kConfigError when `model` is not configured.
  StageModel stage_model(const std::string& model, double temperature) const;
  std::vector<EndpointConfig> endpoint_list() const;
};

}  // namespace revfocus
