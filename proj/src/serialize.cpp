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

#include "revfocus/serialize.hpp"

#include "revfocus/error.hpp"

namespace revfocus {

namespace {

std::string str(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kMalformedRecord,
                std::string("missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

std::string_view origin_kind(const Origin& o) {
  return o.is_expert() ? "expert" : "model";
}

}  // namespace

void to_json(json& j, TargetFacet f) { j = std::string(to_string(f)); }
void from_json(const json& j, TargetFacet& f) {
  f = target_from_id(j.get<std::string>());
}
void to_json(json& j, AspectFacet f) { j = std::string(to_string(f)); }
void from_json(const json& j, AspectFacet& f) {
  f = aspect_from_id(j.get<std::string>());
}
void to_json(json& j, Polarity p) { j = std::string(to_string(p)); }
void from_json(const json& j, Polarity& p) {
  p = polarity_from_id(j.get<std::string>());
}
void to_json(json& j, FacetKind k) { j = std::string(to_string(k)); }
void from_json(const json& j, FacetKind& k) {
  k = facet_kind_from_id(j.get<std::string>());
}
void to_json(json& j, Decision d) { j = std::string(to_string(d)); }
void from_json(const json& j, Decision& d) {
  d = decision_from_id(j.get<std::string>());
}

void to_json(json& j, const PaperRecord& r) {
  j = json{{"paper_id", r.paper_id},   {"title", r.title},
           {"venue_year", r.venue_year}, {"decision", r.decision},
           {"body_text", r.body_text}, {"source_meta", r.source_meta}};
}

void from_json(const json& j, PaperRecord& r) {
  r.paper_id = str(j, "paper_id");
  r.title = j.value("title", "");
  r.venue_year = j.value("venue_year", 0);
  r.decision = j.at("decision").get<Decision>();
  r.body_text = j.value("body_text", "");
  r.source_meta = j.value("source_meta", std::map<std::string, std::string>{});
}

void to_json(json& j, const ReviewBundle& b) {
  json reviews = json::array();
  for (const auto& r : b.individual_reviews) {
    reviews.push_back({{"reviewer_id", r.reviewer_id}, {"text", r.text}});
  }
  j = json{{"paper_id", b.paper_id},
           {"meta_review", b.meta_review},
           {"individual_reviews", std::move(reviews)}};
}

void from_json(const json& j, ReviewBundle& b) {
  b.paper_id = str(j, "paper_id");
  b.meta_review = j.value("meta_review", "");
  b.individual_reviews.clear();
  for (const auto& r : j.value("individual_reviews", json::array())) {
    b.individual_reviews.push_back({str(r, "reviewer_id"), str(r, "text")});
  }
}

void to_json(json& j, const ReviewPoint& p) {
  j = json{{"point_id", p.point_id},
           {"paper_id", p.paper_id},
           {"polarity", p.polarity},
           {"header", p.header ? json(*p.header) : json(nullptr)},
           {"body", p.body},
           {"origin", origin_kind(p.origin)}};
  if (p.origin.model_id) j["model_id"] = *p.origin.model_id;
}

void from_json(const json& j, ReviewPoint& p) {
  p.point_id = str(j, "point_id");
  p.paper_id = str(j, "paper_id");
  p.polarity = j.at("polarity").get<Polarity>();
  if (j.contains("header") && j.at("header").is_string()) {
    p.header = j.at("header").get<std::string>();
  } else {
    p.header.reset();
  }
  p.body = str(j, "body");
  const std::string origin = str(j, "origin");
  if (origin == "expert") {
    p.origin = Origin::expert();
  } else if (origin == "model") {
    p.origin = Origin::model(str(j, "model_id"));
  } else {
    throw Error(ErrorCode::kMalformedRecord, "origin '" + origin + "'");
  }
}

void to_json(json& j, const AnnotatedPoint& a) {
  j = json{{"point", a.point},
           {"target", a.target},
           {"aspect", a.aspect},
           {"annotator_id", a.annotator_id},
           {"raw_annotator_output", a.raw_annotator_output}};
}

void from_json(const json& j, AnnotatedPoint& a) {
  a.point = j.at("point").get<ReviewPoint>();
  a.target = j.at("target").get<TargetFacet>();
  a.aspect = j.at("aspect").get<AspectFacet>();
  a.annotator_id = j.value("annotator_id", "");
  a.raw_annotator_output = j.value("raw_annotator_output", "");
}

void to_json(json& j, const FocusDistribution& d) {
  json weights = json::object();
  for (std::size_t i = 0; i < d.weights().size(); ++i) {
    weights[std::string(facet_id(facet_at(d.kind(), i)))] = d.weights()[i];
  }
  j = json{{"kind", d.kind()},
           {"polarity", d.polarity()},
           {"support", d.support()},
           {"weights", std::move(weights)}};
}

void from_json(const json& j, FocusDistribution& d) {
  const auto kind = j.at("kind").get<FacetKind>();
  const auto polarity = j.at("polarity").get<Polarity>();
  std::vector<double> weights(vocabulary_size(kind), 0.0);
  const auto& w = j.at("weights");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = w.at(std::string(facet_id(facet_at(kind, i)))).get<double>();
  }
  d = FocusDistribution::from_weights(kind, polarity, std::move(weights),
                                      j.at("support").get<std::size_t>());
}

void to_json(json& j, const FocusProfile& p) {
  j = json{{"group_id", p.group_id}, {"distributions", p.distributions}};
}

void from_json(const json& j, FocusProfile& p) {
  p.group_id = str(j, "group_id");
  p.distributions.assign(4, FocusDistribution{});
  const auto& ds = j.at("distributions");
  if (ds.size() != 4) {
    throw Error(ErrorCode::kMalformedRecord, "profile needs four distributions");
  }
  std::array<bool, 4> seen{};
  for (const auto& dj : ds) {
    auto d = dj.get<FocusDistribution>();
    const auto i = FocusProfile::quadrant_index(d.kind(), d.polarity());
    if (seen[i]) {
      throw Error(ErrorCode::kMalformedRecord, "duplicate profile quadrant");
    }
    seen[i] = true;
    p.distributions[i] = std::move(d);
  }
}

void to_json(json& j, const DraftPoint& d) {
  j = json{{"polarity", d.polarity},
           {"text", d.text},
           {"stage", std::string(to_string(d.stage))}};
}

void from_json(const json& j, DraftPoint& d) {
  d.polarity = j.at("polarity").get<Polarity>();
  d.text = str(j, "text");
  const std::string stage = str(j, "stage");
  if (stage == "meta_extracted") {
    d.stage = DraftStage::kMetaExtracted;
  } else if (stage == "augmented") {
    d.stage = DraftStage::kAugmented;
  } else if (stage == "paraphrased") {
    d.stage = DraftStage::kParaphrased;
  } else {
    throw Error(ErrorCode::kMalformedRecord, "draft stage '" + stage + "'");
  }
}

void to_json(json& j, const GeneratedReview& g) {
  j = json{{"paper_id", g.paper_id},
           {"model_id", g.model_id},
           {"raw_text", g.raw_text},
           {"parsed", g.parsed},
           {"parse_mode", g.parse_mode ? json(std::string(to_string(*g.parse_mode)))
                                       : json(nullptr)},
           {"parse_failed", g.parse_failed},
           {"prompt_manifest_hash", g.prompt_manifest_hash},
           {"source_meta", g.source_meta}};
}

void from_json(const json& j, GeneratedReview& g) {
  g.paper_id = str(j, "paper_id");
  g.model_id = str(j, "model_id");
  g.raw_text = j.value("raw_text", "");
  g.parsed = j.value("parsed", std::vector<ReviewPoint>{});
  g.parse_mode.reset();
  if (j.contains("parse_mode") && j.at("parse_mode").is_string()) {
    const auto m = j.at("parse_mode").get<std::string>();
    if (m == "structured") {
      g.parse_mode = ParseMode::kStructured;
    } else if (m == "fallback_markdown") {
      g.parse_mode = ParseMode::kFallbackMarkdown;
    } else {
      throw Error(ErrorCode::kMalformedRecord, "parse_mode '" + m + "'");
    }
  }
  g.parse_failed = j.value("parse_failed", false);
  g.prompt_manifest_hash = j.value("prompt_manifest_hash", "");
  g.source_meta = j.value("source_meta", std::map<std::string, std::string>{});
}

}  // namespace revfocus
