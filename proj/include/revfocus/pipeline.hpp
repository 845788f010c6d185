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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "revfocus/annotator.hpp"
#include "revfocus/config.hpp"
#include "revfocus/text_metrics.hpp"

namespace revfocus {

/// Stage file locations inside a run directory.
struct RunPaths {
  std::filesystem::path dir;

  std::filesystem::path papers() const { return dir / "papers.jsonl"; }
  std::filesystem::path bundles() const { return dir / "bundles.jsonl"; }
  std::filesystem::path expert_points() const { return dir / "expert_points.jsonl"; }
  std::filesystem::path model_reviews() const { return dir / "model_reviews.jsonl"; }
  std::filesystem::path annotations() const { return dir / "annotations.jsonl"; }
  std::filesystem::path irr_predictions() const { return dir / "irr_predictions.jsonl"; }
  std::filesystem::path irr_report() const { return dir / "irr_report.json"; }
  std::filesystem::path metric_report() const { return dir / "metric_report.json"; }
  std::filesystem::path report_text() const { return dir / "report.txt"; }
  std::filesystem::path radar_csv() const { return dir / "radar.csv"; }
  std::filesystem::path manifest() const { return dir / "manifest.json"; }
};

struct Exclusion {
  std::string id;
  ErrorInfo error;
};

/// What one stage invocation did. Items already present in the stage file
/// are `reused`; `attempted` counts the items this invocation worked on.
struct StageSummary {
  std::string stage;
  std::size_t total = 0;
  std::size_t reused = 0;
  std::size_t attempted = 0;
  std::size_t completed = 0;
  std::vector<Exclusion> excluded;
  // Items skipped by contract rather than lost (e.g. no meta-review).
  std::size_t not_applicable = 0;

  /// Excluded fraction of the items the stage is responsible for.
  double loss() const;
  bool over_threshold(double threshold) const { return loss() > threshold; }
};

json to_json_value(const StageSummary& s);

/// Throws kMissingStage naming the stage file when it does not exist.
void require_stage(const std::filesystem::path& path, const std::string& stage);

/// Every stage writes its output file, then records the summary and the file
/// entry in manifest.json. LLM stages skip items already present in their
/// output file and checkpoint after every chunk, so a killed stage can be
/// rerun to the same result.
StageSummary run_ingest(const RunConfig& config);
StageSummary run_extract_expert(const RunConfig& config, ChatClient& client);
StageSummary run_generate(const RunConfig& config, ChatClient& client,
                          const std::vector<std::string>& models = {});
StageSummary run_annotate(const RunConfig& config, ChatClient& client);

struct IrrRun {
  StageSummary summary;
  IrrReport report;
};

/// Annotates the gold points and scores them against the gold labels. Gold
/// points the annotator could not label are reported as exclusions.
IrrRun run_irr(const RunConfig& config, ChatClient& client);

// --- evaluation ----------------------------------------------------------------

struct EvalOptions {
  double epsilon = kDefaultSmoothing;
  KlDirection direction = KlDirection::kHumanToModel;
  MatchMode match_mode = MatchMode::kMultiset;
  LabelMatch label_match = LabelMatch::kProjected;
  TextCandidate text_candidate = TextCandidate::kRawText;
  EmbeddingBackend* embedding = nullptr;

  static EvalOptions from_config(const RunConfig& config);
};

struct EvalInputs {
  std::vector<AnnotatedPoint> annotations;
  // Optional: all extracted points, for counts and text similarity.
  std::optional<std::vector<ReviewPoint>> expert_points;
  std::optional<std::vector<GeneratedReview>> model_reviews;
  // sha256 of each input file, copied into the provenance header.
  std::map<std::string, std::string> input_digests;
};

/// Reference text for text similarity: strengths then weaknesses, each as
/// display_text(), joined by a blank line.
std::string join_points(const std::vector<ReviewPoint>& points);

/// metric_report.json contents. Deterministic given inputs and options.
json evaluate(const EvalInputs& inputs, const EvalOptions& options);

EvalInputs load_eval_inputs(const RunPaths& paths);
json run_evaluate(const RunConfig& config);

/// Fixed-width grid with one row per model.
std::string render_table(const json& metric_report);
/// kind,polarity,facet,group,weight,support; one row per facet x group x
/// polarity x kind.
std::string render_radar_csv(const json& metric_report);
void run_report(const RunConfig& config);

}  // namespace revfocus
