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

#include "revfocus/annotator.hpp"

#include <map>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "revfocus/parallel.hpp"

namespace revfocus {

std::string annotation_prompt_name(FacetKind kind, Polarity polarity) {
  return "annotate_" + std::string(to_string(kind)) + "_" + std::string(to_string(polarity));
}

namespace {

std::string allowed_labels(FacetKind kind) {
  std::string out;
  for (std::size_t i = 0; i < vocabulary_size(kind); ++i) {
    if (!out.empty()) out += ", ";
    const Facet f = facet_at(kind, i);
    out += std::visit([](auto v) { return std::string(display_name(v)); }, f);
  }
  return out;
}

}  // namespace

Annotator::Annotator(ChatClient& client, const PromptSet& prompts, StageModel model,
                     const SynonymTable& synonyms)
    : client_(client), prompts_(prompts), model_(std::move(model)), synonyms_(synonyms) {}

std::pair<Facet, std::string> Annotator::label(const ReviewPoint& point, FacetKind kind) {
  auto messages = prompts_.render(annotation_prompt_name(kind, point.polarity),
                                  {{"point", point.display_text()}});
  auto ask = [&] {
    ChatRequest req{model_.endpoint_id, model_.model_id, messages, model_.temperature,
                    model_.max_output_tokens, ResponseHint::kFreeText};
    return client_.complete(req).text;
  };
  std::string raw = ask();
  try {
    return {parse_facet(kind, raw, synonyms_), raw};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnknownLabel) throw;
  }
  messages.push_back({Role::kAssistant, raw});
  messages.push_back(
      prompts_.render("retry_label", {{"previous", raw}, {"allowed_labels", allowed_labels(kind)}})
          .back());
  const std::string second = ask();
  try {
    return {parse_facet(kind, second, synonyms_), second};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnknownLabel) throw;
    throw Error(ErrorCode::kAnnotationFailed,
                point.point_id + " (" + std::string(to_string(kind)) + "): unparseable label '" +
                    second.substr(0, 80) + "'");
  }
}

AnnotatedPoint Annotator::annotate_point(const ReviewPoint& point) {
  if (point.body.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "point " + point.point_id + " has an empty body");
  }
  auto [target, raw_target] = label(point, FacetKind::kTarget);
  auto [aspect, raw_aspect] = label(point, FacetKind::kAspect);
  AnnotatedPoint out;
  out.point = point;
  out.target = std::get<TargetFacet>(target);
  out.aspect = std::get<AspectFacet>(aspect);
  out.annotator_id = model_.output_id();
  out.raw_annotator_output = json{{"target", raw_target}, {"aspect", raw_aspect}}.dump();
  return out;
}

std::vector<Result<AnnotatedPoint>> Annotator::annotate_corpus(
    const std::vector<ReviewPoint>& points, std::size_t parallelism) {
  std::vector<std::optional<Result<AnnotatedPoint>>> slots(points.size());
  parallel_for(points.size(), parallelism, [&](std::size_t i) {
    try {
      slots[i].emplace(annotate_point(points[i]));
    } catch (const std::exception& e) {
      slots[i].emplace(error_info(e));
    }
  });
  std::vector<Result<AnnotatedPoint>> out;
  out.reserve(points.size());
  std::size_t failed = 0;
  for (auto& s : slots) {
    if (!s->ok()) ++failed;
    out.push_back(std::move(*s));
  }
  if (failed > 0) spdlog::warn("{} of {} point(s) could not be annotated", failed, points.size());
  return out;
}

KappaResult cohens_kappa_detail(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kLengthMismatch,
                "label vectors have lengths " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  std::map<int, std::uint64_t> rows;
  std::map<int, std::uint64_t> cols;
  std::uint64_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++rows[a[i]];
    ++cols[b[i]];
    if (a[i] == b[i]) ++agree;
  }
  const std::uint64_t n = a.size();
  std::uint64_t chance = 0;  // sum over categories of row * col
  for (const auto& [category, r] : rows) {
    auto it = cols.find(category);
    if (it != cols.end()) chance += r * it->second;
  }
  KappaResult out;
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  out.observed = static_cast<double>(agree) / static_cast<double>(n);
  out.expected = static_cast<double>(chance) / nn;
  if (chance == n * n) {
    out.degenerate = true;
    out.kappa = 1.0;
    return out;
  }
  // Both terms stay below 2^53 for any realistic n, so this is the correctly
  // rounded value of the exact rational.
  const auto num = static_cast<std::int64_t>(agree * n) - static_cast<std::int64_t>(chance);
  const auto den = static_cast<std::int64_t>(n * n) - static_cast<std::int64_t>(chance);
  out.kappa = static_cast<double>(num) / static_cast<double>(den);
  return out;
}

double cohens_kappa(std::span<const int> a, std::span<const int> b) {
  return cohens_kappa_detail(a, b).kappa;
}

double cohens_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_map<std::string, int> codes;
  auto code = [&](const std::string& s) {
    return codes.try_emplace(s, static_cast<int>(codes.size())).first->second;
  };
  std::vector<int> ca;
  std::vector<int> cb;
  ca.reserve(a.size());
  cb.reserve(b.size());
  for (const auto& s : a) ca.push_back(code(s));
  for (const auto& s : b) cb.push_back(code(s));
  return cohens_kappa(ca, cb);
}

std::vector<GoldLabel> gold_from_annotations(const std::vector<AnnotatedPoint>& annotations) {
  std::vector<GoldLabel> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) out.push_back({a.point.point_id, a.target, a.aspect});
  return out;
}

IrrReport validate_annotator(const std::vector<GoldLabel>& gold,
                             const std::vector<AnnotatedPoint>& predicted) {
  std::unordered_map<std::string, const AnnotatedPoint*> by_id;
  for (const auto& p : predicted) by_id.emplace(p.point.point_id, &p);

  IrrReport report;
  report.n_items = gold.size();
  report.target_confusion = {FacetKind::kTarget,
                             std::vector(kAllTargets.size(), std::vector<std::size_t>(kAllTargets.size(), 0))};
  report.aspect_confusion = {FacetKind::kAspect,
                             std::vector(kAllAspects.size(), std::vector<std::size_t>(kAllAspects.size(), 0))};
  std::vector<int> gold_t, pred_t, gold_a, pred_a;
  for (const auto& g : gold) {
    auto it = by_id.find(g.point_id);
    if (it == by_id.end()) throw Error(ErrorCode::kMissingPrediction, g.point_id);
    const auto& p = *it->second;
    gold_t.push_back(static_cast<int>(g.human_target));
    pred_t.push_back(static_cast<int>(p.target));
    gold_a.push_back(static_cast<int>(g.human_aspect));
    pred_a.push_back(static_cast<int>(p.aspect));
    ++report.target_confusion.counts[gold_t.back()][pred_t.back()];
    ++report.aspect_confusion.counts[gold_a.back()][pred_a.back()];
  }
  if (gold.empty()) return report;
  const auto kt = cohens_kappa_detail(gold_t, pred_t);
  const auto ka = cohens_kappa_detail(gold_a, pred_a);
  report.kappa_target = kt.kappa;
  report.kappa_aspect = ka.kappa;
  report.degenerate_target = kt.degenerate;
  report.degenerate_aspect = ka.degenerate;
  return report;
}

json irr_report_json(const IrrReport& report) {
  auto matrix = [](const ConfusionMatrix& m) {
    json labels = json::array();
    for (std::size_t i = 0; i < vocabulary_size(m.kind); ++i) {
      labels.push_back(std::string(facet_id(facet_at(m.kind, i))));
    }
    return json{{"labels", labels}, {"rows", "gold"}, {"cols", "predicted"}, {"counts", m.counts}};
  };
  return json{{"n_items", report.n_items},
              {"kappa_target", report.kappa_target},
              {"kappa_aspect", report.kappa_aspect},
              {"degenerate", {{"target", report.degenerate_target},
                              {"aspect", report.degenerate_aspect}}},
              {"confusion", {{"target", matrix(report.target_confusion)},
                             {"aspect", matrix(report.aspect_confusion)}}}};
}

}  // namespace revfocus
