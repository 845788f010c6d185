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

#include "revfocus/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "revfocus/parallel.hpp"

namespace revfocus {

namespace {

constexpr std::string_view kVersion = "0.1.0";

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

// Runs fn(i) for i in [0, n) in chunks; checkpoint(end) runs on the calling
// thread after each chunk so partial progress reaches disk.
template <typename Fn, typename Checkpoint>
void chunked(std::size_t n, std::size_t parallelism, Fn&& fn, Checkpoint&& checkpoint) {
  const std::size_t chunk = std::max<std::size_t>(16, parallelism * 4);
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t end = std::min(n, start + chunk);
    parallel_for(end - start, parallelism, [&](std::size_t k) { fn(start + k); });
    checkpoint(end);
  }
}

CorpusManifest open_manifest(const RunPaths& paths) {
  if (std::filesystem::exists(paths.manifest())) return CorpusManifest::load(paths.manifest());
  return {};
}

void record_stage(const RunPaths& paths, const StageSummary& summary, const std::string& file_key,
                  const StageEntry& entry) {
  auto manifest = open_manifest(paths);
  manifest.stages[file_key] = entry;
  manifest.runs[summary.stage] = to_json_value(summary);
  manifest.save(paths.manifest());
}

StageEntry entry_for(const std::filesystem::path& path, std::size_t count) {
  return {path.filename().string(), count, sha256_hex(read_file(path))};
}

PromptSet load_prompts(const RunConfig& config) {
  config.require_path(config.prompts_dir / "manifest.json", "prompt manifest");
  return PromptSet::load(config.prompts_dir);
}

void log_summary(const StageSummary& s) {
  spdlog::info("{}: {} item(s), {} reused, {} done now, {} excluded, {} not applicable", s.stage,
               s.total, s.reused, s.completed, s.excluded.size(), s.not_applicable);
}

// Shared by annotate and irr: labels `points`, reusing what `out_path`
// already holds for the same annotator.
StageSummary annotate_into(const std::string& stage, const RunConfig& config, ChatClient& client,
                           const std::vector<ReviewPoint>& points,
                           const std::filesystem::path& out_path,
                           std::vector<AnnotatedPoint>* result) {
  if (!config.annotator_model) throw Error(ErrorCode::kConfigError, "annotator.model is not set");
  const auto model = config.stage_model(*config.annotator_model, config.annotation_temperature);
  const auto prompts = load_prompts(config);

  std::map<std::string, AnnotatedPoint> done;
  if (std::filesystem::exists(out_path)) {
    for (auto& a : load_stage<AnnotatedPoint>(out_path)) {
      if (a.annotator_id != model.output_id()) {
        spdlog::warn("{}: dropping annotation of {} by '{}'", stage, a.point.point_id,
                     a.annotator_id);
        continue;
      }
      done.emplace(a.point.point_id, std::move(a));
    }
  }
  StageSummary summary;
  summary.stage = stage;
  summary.total = points.size();
  std::vector<const ReviewPoint*> todo;
  std::set<std::string> ids;
  for (const auto& p : points) {
    if (!ids.insert(p.point_id).second) {
      throw Error(ErrorCode::kMalformedRecord, "duplicate point_id " + p.point_id);
    }
    auto it = done.find(p.point_id);
    if (it != done.end() && it->second.point == p) {
      ++summary.reused;
    } else {
      done.erase(p.point_id);
      todo.push_back(&p);
    }
  }
  auto write = [&] {
    std::vector<AnnotatedPoint> ordered;
    for (const auto& p : points) {
      if (auto it = done.find(p.point_id); it != done.end()) ordered.push_back(it->second);
    }
    persist_stage(ordered, out_path);
    return ordered;
  };

  Annotator annotator(client, prompts, model);
  std::vector<std::optional<Result<AnnotatedPoint>>> slots(todo.size());
  std::size_t flushed = 0;
  summary.attempted = todo.size();
  chunked(
      todo.size(), config.parallelism,
      [&](std::size_t i) {
        try {
          slots[i].emplace(annotator.annotate_point(*todo[i]));
        } catch (const std::exception& e) {
          slots[i].emplace(error_info(e));
        }
      },
      [&](std::size_t end) {
        for (; flushed < end; ++flushed) {
          auto& r = *slots[flushed];
          if (r.ok()) {
            done[todo[flushed]->point_id] = r.value();
            ++summary.completed;
          } else {
            summary.excluded.push_back({todo[flushed]->point_id, r.error()});
          }
        }
        write();
      });
  auto ordered = write();
  if (result != nullptr) *result = std::move(ordered);
  return summary;
}

json f1_json(const F1Result& r) {
  return json{{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
              {"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}};
}

std::string quadrant_name(FacetKind kind, Polarity polarity) {
  return std::string(to_string(polarity)) + "_" + std::string(to_string(kind));
}

json counts_json(const CountStats& c) {
  auto hist = [](const std::map<std::size_t, std::size_t>& h) {
    json out = json::object();
    for (const auto& [k, v] : h) out[std::to_string(k)] = v;
    return out;
  };
  return json{{"n_papers", c.n_papers},
              {"mean_strengths", c.mean_strengths},
              {"mean_weaknesses", c.mean_weaknesses},
              {"mean_total", c.mean_total},
              {"strength_histogram", hist(c.strength_histogram)},
              {"weakness_histogram", hist(c.weakness_histogram)},
              {"total_histogram", hist(c.total_histogram)}};
}

json length_json(const LengthStats& l) {
  return json{{"n_reviews", l.n_reviews},
              {"mean_chars", l.mean_chars},
              {"mean_whitespace_tokens", l.mean_whitespace_tokens}};
}

const std::array<std::optional<Polarity>, 3> kPolarityFilters = {
    std::nullopt, Polarity::kStrength, Polarity::kWeakness};

std::string filter_name(std::optional<Polarity> p) {
  return p ? std::string(to_string(*p)) : "all";
}

}  // namespace

double StageSummary::loss() const {
  const std::size_t base = total > not_applicable ? total - not_applicable : 0;
  if (base == 0) return 0.0;
  return static_cast<double>(excluded.size()) / static_cast<double>(base);
}

json to_json_value(const StageSummary& s) {
  json excluded = json::array();
  for (const auto& e : s.excluded) {
    excluded.push_back({{"id", e.id},
                        {"code", std::string(error_code_name(e.error.code))},
                        {"message", e.error.message}});
  }
  return json{{"total", s.total},         {"reused", s.reused},
              {"attempted", s.attempted}, {"completed", s.completed},
              {"excluded", excluded},     {"not_applicable", s.not_applicable},
              {"loss", s.loss()}};
}

void require_stage(const std::filesystem::path& path, const std::string& stage) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kMissingStage,
                stage + " (" + path.string() + " not found; run '" + stage + "' first)");
  }
}

StageSummary run_ingest(const RunConfig& config) {
  if (config.exports.empty()) throw Error(ErrorCode::kConfigError, "corpus.exports is empty");
  for (const auto& p : config.exports) config.require_path(p, "export");
  std::optional<ExportKeyMap> key_map;
  if (config.schema == ExportSchema::kOpenReviewV1) {
    if (!config.key_map) throw Error(ErrorCode::kConfigError, "corpus.key_map is required");
    config.require_path(*config.key_map, "key map");
    key_map = ExportKeyMap::load(*config.key_map);
  }
  if (config.sample_fraction < 1.0 && !config.sample_seed) {
    throw Error(ErrorCode::kConfigError, "corpus.sample_seed is required when sampling");
  }
  LoadOptions options{config.schema, config.strict, key_map ? &*key_map : nullptr};

  StageSummary summary;
  summary.stage = "ingest";
  std::vector<PaperRecord> papers;
  std::map<std::string, ReviewBundle> bundles;
  std::size_t missing_meta = 0;
  for (const auto& path : config.exports) {
    auto loaded = load_export(path, options);
    summary.total += loaded.papers.size() + loaded.malformed_lines.size();
    for (auto line : loaded.malformed_lines) {
      summary.excluded.push_back(
          {path.filename().string() + ":" + std::to_string(line),
           {ErrorCode::kMalformedRecord, "unparseable export line", 0}});
    }
    missing_meta += loaded.missing_meta_review.size();
    for (auto& b : loaded.bundles) {
      if (!bundles.emplace(b.paper_id, b).second) {
        throw Error(ErrorCode::kMalformedRecord, "paper " + b.paper_id + " appears in two exports");
      }
    }
    for (auto& p : loaded.papers) papers.push_back(std::move(p));
  }
  if (!config.decisions.empty()) papers = filter_decision(papers, config.decisions);
  papers = filter_years(papers, config.year_min, config.year_max);
  papers = sample(papers, config.sample_fraction, config.sample_seed.value_or(0));

  std::vector<ReviewBundle> kept;
  std::size_t kept_missing = 0;
  for (const auto& p : papers) {
    kept.push_back(bundles.at(p.paper_id));
    if (blank(kept.back().meta_review)) ++kept_missing;
  }
  summary.attempted = summary.total;
  summary.completed = papers.size();

  const RunPaths paths{config.run_dir};
  std::filesystem::create_directories(paths.dir);
  const auto papers_entry = persist_stage(papers, paths.papers());
  const auto bundles_entry = persist_stage(kept, paths.bundles());

  auto manifest = open_manifest(paths);
  manifest.source_paths.clear();
  for (const auto& p : config.exports) manifest.source_paths.push_back(p.string());
  manifest.year_min = config.year_min;
  manifest.year_max = config.year_max;
  manifest.decision_filter.assign(config.decisions.begin(), config.decisions.end());
  manifest.sample_fraction = config.sample_fraction;
  manifest.sample_seed = config.sample_seed.value_or(0);
  manifest.stages["papers"] = {paths.papers().filename().string(), papers_entry.count,
                               papers_entry.sha256};
  manifest.stages["bundles"] = {paths.bundles().filename().string(), bundles_entry.count,
                                bundles_entry.sha256};
  auto run = to_json_value(summary);
  run["missing_meta_review_loaded"] = missing_meta;
  run["missing_meta_review_kept"] = kept_missing;
  manifest.runs["ingest"] = run;
  manifest.save(paths.manifest());
  log_summary(summary);
  return summary;
}

StageSummary run_extract_expert(const RunConfig& config, ChatClient& client) {
  const RunPaths paths{config.run_dir};
  require_stage(paths.bundles(), "ingest");
  if (!config.expert_model) throw Error(ErrorCode::kConfigError, "expert.model is not set");
  const auto model = config.stage_model(*config.expert_model, config.expert_temperature);
  const auto prompts = load_prompts(config);
  const auto bundles = load_stage<ReviewBundle>(paths.bundles());

  std::map<std::string, std::vector<ReviewPoint>> done;
  if (std::filesystem::exists(paths.expert_points())) {
    for (auto& p : load_stage<ReviewPoint>(paths.expert_points())) {
      done[p.paper_id].push_back(std::move(p));
    }
  }
  StageSummary summary;
  summary.stage = "extract-expert";
  summary.total = bundles.size();
  std::vector<const ReviewBundle*> todo;
  for (const auto& b : bundles) {
    if (blank(b.meta_review)) {
      ++summary.not_applicable;
    } else if (done.count(b.paper_id)) {
      ++summary.reused;
    } else {
      todo.push_back(&b);
    }
  }
  auto write = [&] {
    std::vector<ReviewPoint> flat;
    for (const auto& [id, pts] : done) flat.insert(flat.end(), pts.begin(), pts.end());
    return persist_stage(flat, paths.expert_points());
  };

  ExpertChain chain(client, prompts, model);
  std::vector<std::optional<ExpertChain::Outcome>> outcomes(todo.size());
  std::size_t flushed = 0;
  summary.attempted = todo.size();
  chunked(
      todo.size(), config.parallelism,
      [&](std::size_t i) { outcomes[i].emplace(chain.run(*todo[i])); },
      [&](std::size_t end) {
        for (; flushed < end; ++flushed) {
          auto& o = *outcomes[flushed];
          if (o.excluded) {
            summary.excluded.push_back({o.paper_id, *o.excluded});
          } else {
            done[o.paper_id] = std::move(o.points);
            ++summary.completed;
          }
        }
        write();
      });
  const auto entry = write();
  record_stage(paths, summary, "expert_points", {paths.expert_points().filename().string(),
                                                 entry.count, entry.sha256});
  log_summary(summary);
  return summary;
}

StageSummary run_generate(const RunConfig& config, ChatClient& client,
                          const std::vector<std::string>& models_override) {
  const auto& model_ids = models_override.empty() ? config.review_models : models_override;
  if (model_ids.empty()) throw Error(ErrorCode::kConfigError, "generation.models is empty");
  std::vector<StageModel> models;
  for (const auto& id : model_ids) {
    models.push_back(config.stage_model(id, config.generation_temperature));
  }
  const RunPaths paths{config.run_dir};
  require_stage(paths.papers(), "ingest");
  const auto prompts = load_prompts(config);
  const auto papers = load_stage<PaperRecord>(paths.papers());

  using Key = std::pair<std::string, std::string>;  // (model, paper)
  std::map<Key, GeneratedReview> done;
  if (std::filesystem::exists(paths.model_reviews())) {
    for (auto& r : load_stage<GeneratedReview>(paths.model_reviews())) {
      done.emplace(Key{r.model_id, r.paper_id}, std::move(r));
    }
  }
  StageSummary summary;
  summary.stage = "generate";
  std::vector<std::pair<const StageModel*, const PaperRecord*>> todo;
  for (const auto& m : models) {
    for (const auto& p : papers) {
      ++summary.total;
      auto it = done.find({m.output_id(), p.paper_id});
      if (it == done.end()) {
        todo.emplace_back(&m, &p);
        continue;
      }
      ++summary.reused;
      if (it->second.parse_failed) {
        summary.excluded.push_back({m.output_id() + "/" + p.paper_id,
                                    {ErrorCode::kParseFailed, "stored review did not parse", 0}});
      }
    }
  }
  auto write = [&] {
    std::vector<GeneratedReview> flat;
    for (const auto& [k, r] : done) flat.push_back(r);
    return persist_stage(flat, paths.model_reviews());
  };

  GenerationOptions options;
  options.max_paper_tokens = config.max_paper_tokens;
  std::vector<std::optional<Result<GeneratedReview>>> slots(todo.size());
  std::size_t flushed = 0;
  summary.attempted = todo.size();
  chunked(
      todo.size(), config.parallelism,
      [&](std::size_t i) {
        try {
          slots[i].emplace(generate_review(client, prompts, *todo[i].second, *todo[i].first, options));
        } catch (const std::exception& e) {
          slots[i].emplace(error_info(e));
        }
      },
      [&](std::size_t end) {
        for (; flushed < end; ++flushed) {
          const auto& [m, p] = todo[flushed];
          const std::string id = m->output_id() + "/" + p->paper_id;
          auto& r = *slots[flushed];
          if (!r.ok()) {
            summary.excluded.push_back({id, r.error()});
            continue;
          }
          if (r.value().parse_failed) {
            summary.excluded.push_back({id, {ErrorCode::kParseFailed, "review did not parse", 0}});
          } else {
            ++summary.completed;
          }
          done[{m->output_id(), p->paper_id}] = std::move(r.value());
        }
        write();
      });
  const auto entry = write();
  record_stage(paths, summary, "model_reviews", {paths.model_reviews().filename().string(),
                                                 entry.count, entry.sha256});
  log_summary(summary);
  return summary;
}

StageSummary run_annotate(const RunConfig& config, ChatClient& client) {
  const RunPaths paths{config.run_dir};
  const bool have_expert = std::filesystem::exists(paths.expert_points());
  const bool have_models = std::filesystem::exists(paths.model_reviews());
  if (!have_expert && !have_models) require_stage(paths.expert_points(), "extract-expert");
  std::vector<ReviewPoint> points;
  if (have_expert) points = load_stage<ReviewPoint>(paths.expert_points());
  if (have_models) {
    for (const auto& r : load_stage<GeneratedReview>(paths.model_reviews())) {
      points.insert(points.end(), r.parsed.begin(), r.parsed.end());
    }
  }
  auto summary = annotate_into("annotate", config, client, points, paths.annotations(), nullptr);
  record_stage(paths, summary, "annotations", entry_for(paths.annotations(), summary.total - summary.excluded.size()));
  log_summary(summary);
  return summary;
}

IrrRun run_irr(const RunConfig& config, ChatClient& client) {
  if (!config.gold_labels) throw Error(ErrorCode::kConfigError, "irr.gold is not set");
  config.require_path(*config.gold_labels, "gold label file");
  const RunPaths paths{config.run_dir};
  std::filesystem::create_directories(paths.dir);
  const auto gold_points = load_stage<AnnotatedPoint>(*config.gold_labels);
  std::vector<ReviewPoint> points;
  for (const auto& g : gold_points) points.push_back(g.point);

  IrrRun run;
  std::vector<AnnotatedPoint> predicted;
  run.summary = annotate_into("irr", config, client, points, paths.irr_predictions(), &predicted);

  std::set<std::string> lost;
  for (const auto& e : run.summary.excluded) lost.insert(e.id);
  std::vector<GoldLabel> gold;
  for (const auto& g : gold_from_annotations(gold_points)) {
    if (!lost.count(g.point_id)) gold.push_back(g);
  }
  run.report = validate_annotator(gold, predicted);

  auto doc = irr_report_json(run.report);
  doc["annotator"] = *config.annotator_model;
  doc["temperature"] = config.annotation_temperature;
  doc["n_gold"] = gold_points.size();
  doc["n_excluded"] = run.summary.excluded.size();
  doc["kappa_floor"] = config.kappa_floor ? json(*config.kappa_floor) : json(nullptr);
  write_file_atomic(paths.irr_report(), doc.dump(2) + "\n");
  record_stage(paths, run.summary, "irr_predictions",
               entry_for(paths.irr_predictions(), predicted.size()));
  log_summary(run.summary);
  return run;
}

EvalOptions EvalOptions::from_config(const RunConfig& config) {
  EvalOptions o;
  o.epsilon = config.epsilon;
  o.direction = config.kl_direction;
  o.match_mode = config.match_mode;
  o.label_match = config.label_match;
  o.text_candidate = config.text_candidate;
  return o;
}

std::string join_points(const std::vector<ReviewPoint>& points) {
  std::string out;
  for (const Polarity pol : kAllPolarities) {
    for (const auto& p : points) {
      if (p.polarity != pol) continue;
      if (!out.empty()) out += "\n\n";
      out += p.display_text();
    }
  }
  return out;
}

json evaluate(const EvalInputs& inputs, const EvalOptions& options) {
  std::map<std::string, std::vector<AnnotatedPoint>> groups;
  for (const auto& a : inputs.annotations) groups[a.point.origin.group_id()].push_back(a);
  auto human_it = groups.find("human");
  if (human_it == groups.end()) {
    throw Error(ErrorCode::kEmptySupport, "no expert annotations to compare against");
  }
  const auto& human = human_it->second;
  // Model points are scored only on papers the expert side covers.
  std::set<std::string> eval_papers;
  for (const auto& a : human) eval_papers.insert(a.point.paper_id);
  std::map<std::string, std::size_t> outside;
  for (auto& [group, pts] : groups) {
    if (group == "human") continue;
    const auto before = pts.size();
    std::erase_if(pts, [&](const AnnotatedPoint& a) { return !eval_papers.count(a.point.paper_id); });
    outside[group] = before - pts.size();
  }
  const auto human_profile = focus_profile("human", human);
  const auto human_pairs = build_pair_sets(human);

  // Points for counts: every extracted point when available.
  std::vector<ReviewPoint> all_points;
  if (inputs.expert_points) {
    all_points = *inputs.expert_points;
  } else {
    for (const auto& a : human) all_points.push_back(a.point);
  }
  if (inputs.model_reviews) {
    for (const auto& r : *inputs.model_reviews) {
      all_points.insert(all_points.end(), r.parsed.begin(), r.parsed.end());
    }
  } else {
    for (const auto& [g, pts] : groups) {
      if (g == "human") continue;
      for (const auto& a : pts) all_points.push_back(a.point);
    }
  }
  std::map<std::string, json> counts;
  for (const auto& c : count_stats(all_points)) counts[c.group_id] = counts_json(c);

  // Reference texts per paper.
  std::map<std::string, std::vector<ReviewPoint>> expert_by_paper;
  if (inputs.expert_points) {
    for (const auto& p : *inputs.expert_points) expert_by_paper[p.paper_id].push_back(p);
  }
  std::map<std::string, std::string> reference_text;
  std::vector<std::string> human_texts;
  for (const auto& [paper, pts] : expert_by_paper) {
    reference_text[paper] = join_points(pts);
    human_texts.push_back(reference_text[paper]);
  }

  json provenance = {
      {"tool", "revfocus"},
      {"version", std::string(kVersion)},
      {"schema_version", kSchemaVersion},
      {"epsilon", options.epsilon},
      {"kl_direction", std::string(to_string(options.direction))},
      {"kl_log_base", "e"},
      {"match_mode", std::string(to_string(options.match_mode))},
      {"f1_aggregation", "micro"},
      {"label_match", std::string(to_string(options.label_match))},
      {"tokenizer", std::string(kTokenizerVersion)},
      {"text_candidate", std::string(to_string(options.text_candidate))},
      {"text_reference", "expert_points_joined"},
      {"text_aggregation", "macro_over_papers"},
      {"bleu_smoothing", kBleuSmoothing},
      {"embedding_backend", options.embedding ? json(options.embedding->id()) : json(nullptr)},
      {"inputs", inputs.input_digests}};

  json report;
  report["provenance"] = provenance;
  report["human"] = {{"n_points_annotated", human.size()},
                     {"n_eval_papers", eval_papers.size()},
                     {"profile", human_profile},
                     {"counts", counts.count("human") ? counts["human"] : json(nullptr)},
                     {"length", inputs.expert_points ? length_json(length_stats(human_texts))
                                                     : json(nullptr)}};

  // Pooled per-label counts across models: [axis][filter][facet] -> (tp, fp, fn).
  std::map<std::string, std::map<std::string, std::vector<F1Result>>> pooled_labels;
  json models = json::object();
  for (const auto& [group, pts] : groups) {
    if (group == "human") continue;
    json row;
    const auto profile = focus_profile(group, pts);
    row["n_points_annotated"] = pts.size();
    row["n_points_outside_eval_papers"] = outside[group];
    row["profile"] = profile;
    try {
      const auto kl = avg_focus_kl(human_profile, profile, options.epsilon, options.direction);
      row["avg_kl"] = kl.average;
      json by_quadrant = json::object();
      for (const FacetKind kind : {FacetKind::kTarget, FacetKind::kAspect}) {
        for (const Polarity pol : kAllPolarities) {
          by_quadrant[quadrant_name(kind, pol)] =
              kl.by_quadrant[FocusProfile::quadrant_index(kind, pol)];
        }
      }
      row["kl_by_quadrant"] = by_quadrant;
    } catch (const Error& e) {
      row["avg_kl"] = nullptr;
      row["kl_by_quadrant"] = nullptr;
      row["kl_error"] = e.what();
    }

    const auto cand = build_pair_sets(pts);
    row["f1_overall"] = f1_json(pair_multiset_f1(human_pairs, cand, std::nullopt, options.match_mode));
    row["f1_strength"] =
        f1_json(pair_multiset_f1(human_pairs, cand, Polarity::kStrength, options.match_mode));
    row["f1_weakness"] =
        f1_json(pair_multiset_f1(human_pairs, cand, Polarity::kWeakness, options.match_mode));
    json macro;
    for (const auto filter : kPolarityFilters) {
      macro[filter_name(filter)] = pair_macro_f1(human_pairs, cand, filter, options.match_mode);
    }
    row["f1_macro"] = macro;

    json per_label;
    for (const FacetKind axis : {FacetKind::kTarget, FacetKind::kAspect}) {
      const std::string axis_name(to_string(axis));
      for (const auto filter : kPolarityFilters) {
        const auto results =
            per_label_f1(human_pairs, cand, axis, filter, options.label_match, options.match_mode);
        auto& pooled = pooled_labels[axis_name][filter_name(filter)];
        pooled.resize(results.size());
        json by_facet = json::object();
        for (std::size_t i = 0; i < results.size(); ++i) {
          by_facet[std::string(facet_id(facet_at(axis, i)))] = f1_json(results[i]);
          pooled[i].tp += results[i].tp;
          pooled[i].fp += results[i].fp;
          pooled[i].fn += results[i].fn;
        }
        per_label[axis_name][filter_name(filter)] = by_facet;
      }
    }
    row["per_label_f1"] = per_label;
    row["counts"] = counts.count(group) ? counts[group] : json(nullptr);

    // Text similarity against the joined expert points of the same paper.
    row["rouge_l"] = nullptr;
    row["bleu_4"] = nullptr;
    row["embed_score"] = nullptr;
    row["length"] = nullptr;
    if (inputs.model_reviews && inputs.expert_points) {
      CompensatedSum rouge, bleu, ep, er, ef;
      std::size_t scored = 0, skipped = 0, embedded = 0;
      std::vector<std::string> raw_texts;
      for (const auto& r : *inputs.model_reviews) {
        if (r.model_id != group) continue;
        raw_texts.push_back(r.raw_text);
        auto ref = reference_text.find(r.paper_id);
        const std::string cand_text = options.text_candidate == TextCandidate::kRawText
                                          ? r.raw_text
                                          : join_points(r.parsed);
        if (ref == reference_text.end()) {
          ++skipped;
          continue;
        }
        const auto c = tokenize(cand_text);
        const auto t = tokenize(ref->second);
        if (c.empty() || t.empty()) {
          ++skipped;
          continue;
        }
        rouge.add(rouge_l(c, t));
        bleu.add(bleu_4(c, t));
        if (auto s = embed_score(options.embedding, c, t)) {
          ep.add(s->precision);
          er.add(s->recall);
          ef.add(s->f1);
          ++embedded;
        }
        ++scored;
      }
      if (scored > 0) {
        row["rouge_l"] = rouge.value() / static_cast<double>(scored);
        row["bleu_4"] = bleu.value() / static_cast<double>(scored);
      }
      if (embedded > 0) {
        const double n = static_cast<double>(embedded);
        row["embed_score"] = {{"precision", ep.value() / n},
                              {"recall", er.value() / n},
                              {"f1", ef.value() / n},
                              {"n_papers", embedded}};
      }
      row["text_papers_scored"] = scored;
      row["text_papers_skipped"] = skipped;
      row["length"] = length_json(length_stats(raw_texts));
    }
    models[group] = row;
  }
  report["models"] = models;

  json pooled;
  pooled["counts"] = counts_json(pooled_model_count_stats(all_points));
  json pooled_per_label;
  for (const auto& [axis, filters] : pooled_labels) {
    const FacetKind kind = facet_kind_from_id(axis);
    for (const auto& [filter, results] : filters) {
      json by_facet = json::object();
      for (std::size_t i = 0; i < results.size(); ++i) {
        by_facet[std::string(facet_id(facet_at(kind, i)))] =
            f1_json(f1_from_counts(results[i].tp, results[i].fp, results[i].fn));
      }
      pooled_per_label[axis][filter] = by_facet;
    }
  }
  pooled["per_label_f1"] = pooled_per_label.is_null() ? json::object() : pooled_per_label;
  report["pooled_models"] = pooled;
  return report;
}

EvalInputs load_eval_inputs(const RunPaths& paths) {
  require_stage(paths.annotations(), "annotate");
  EvalInputs in;
  auto digest = [&](const std::filesystem::path& p) {
    in.input_digests[p.filename().string()] = sha256_hex(read_file(p));
  };
  in.annotations = load_stage<AnnotatedPoint>(paths.annotations());
  digest(paths.annotations());
  if (std::filesystem::exists(paths.expert_points())) {
    in.expert_points = load_stage<ReviewPoint>(paths.expert_points());
    digest(paths.expert_points());
  }
  if (std::filesystem::exists(paths.model_reviews())) {
    in.model_reviews = load_stage<GeneratedReview>(paths.model_reviews());
    digest(paths.model_reviews());
  }
  return in;
}

json run_evaluate(const RunConfig& config) {
  const RunPaths paths{config.run_dir};
  const auto report = evaluate(load_eval_inputs(paths), EvalOptions::from_config(config));
  write_file_atomic(paths.metric_report(), report.dump(2) + "\n");
  auto manifest = open_manifest(paths);
  manifest.stages["metric_report"] = entry_for(paths.metric_report(), report["models"].size());
  manifest.save(paths.manifest());
  return report;
}

std::string render_table(const json& report) {
  const auto& prov = report.at("provenance");
  auto num = [](const json& v, int digits) {
    return v.is_number() ? fmt::format("{:.{}f}", v.get<double>(), digits) : std::string("-");
  };
  std::string out;
  out += fmt::format("# KL {} (epsilon {}, log base e); F1 {} {} matching; tokenizer {}; text {}\n",
                     prov.at("kl_direction").get<std::string>(), prov.at("epsilon").dump(),
                     prov.at("f1_aggregation").get<std::string>(),
                     prov.at("match_mode").get<std::string>(),
                     prov.at("tokenizer").get<std::string>(),
                     prov.at("text_candidate").get<std::string>());
  out += fmt::format("{:<28} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>7}\n", "Model", "AvgKL",
                     "F1", "F1(S)", "F1(W)", "ROUGE-L", "BLEU-4", "BERTScore", "Points");
  for (const auto& [id, row] : report.at("models").items()) {
    const auto& counts = row.at("counts");
    out += fmt::format("{:<28} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>7}\n", id,
                       num(row.at("avg_kl"), 4), num(row.at("f1_overall").at("f1"), 3),
                       num(row.at("f1_strength").at("f1"), 3),
                       num(row.at("f1_weakness").at("f1"), 3), num(row.at("rouge_l"), 3),
                       num(row.at("bleu_4"), 3),
                       row.at("embed_score").is_object() ? num(row.at("embed_score").at("f1"), 3)
                                                         : std::string("-"),
                       counts.is_object() ? num(counts.at("mean_total"), 2) : std::string("-"));
  }
  const auto& hc = report.at("human").at("counts");
  out += fmt::format("{:<28} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>7}\n", "human", "-", "-",
                     "-", "-", "-", "-", "-",
                     hc.is_object() ? num(hc.at("mean_total"), 2) : std::string("-"));
  return out;
}

std::string render_radar_csv(const json& report) {
  std::string out = "kind,polarity,facet,group,weight,support\n";
  auto emit = [&](const std::string& group, const json& profile) {
    for (const FacetKind kind : {FacetKind::kTarget, FacetKind::kAspect}) {
      for (const Polarity pol : kAllPolarities) {
        for (const auto& d : profile.at("distributions")) {
          if (d.at("kind") != to_string(kind) || d.at("polarity") != to_string(pol)) continue;
          for (std::size_t i = 0; i < vocabulary_size(kind); ++i) {
            const std::string facet(facet_id(facet_at(kind, i)));
            out += fmt::format("{},{},{},{},{},{}\n", to_string(kind), to_string(pol), facet,
                               group, d.at("weights").at(facet).get<double>(),
                               d.at("support").get<std::size_t>());
          }
        }
      }
    }
  };
  emit("human", report.at("human").at("profile"));
  for (const auto& [id, row] : report.at("models").items()) emit(id, row.at("profile"));
  return out;
}

void run_report(const RunConfig& config) {
  const RunPaths paths{config.run_dir};
  require_stage(paths.metric_report(), "evaluate");
  const json report = json::parse(read_file(paths.metric_report()));
  write_file_atomic(paths.report_text(), render_table(report));
  write_file_atomic(paths.radar_csv(), render_radar_csv(report));
}

}  // namespace revfocus
