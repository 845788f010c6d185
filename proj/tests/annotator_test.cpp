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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

#include "generators.hpp"
#include "oracles.hpp"
#include "revfocus/annotator.hpp"

namespace revfocus {
namespace {

using testing::Rng;
using namespace oracle;

const PromptSet& prompts() {
  static const PromptSet set =
      PromptSet::load(std::filesystem::path(REVFOCUS_SOURCE_DIR) / "prompts");
  return set;
}

const StageModel kAnnotatorModel{"openai", "o3-mini", 0.0, 64, ""};

// Replies by (point text, facet kind); the queue for a key is consumed in
// order, the last reply repeating.
class LabelClient : public ChatClient {
 public:
  void script(const std::string& body, FacetKind kind, std::vector<std::string> replies) {
    replies_[{body, kind}] = std::move(replies);
  }

  ChatResponse complete(const ChatRequest& req) override {
    std::lock_guard lock(mu_);
    seen.push_back(req);
    const auto& first_user = req.messages.at(1).text;
    const FacetKind kind = req.messages.at(0).text.find("target label") != std::string::npos
                               ? FacetKind::kTarget
                               : FacetKind::kAspect;
    for (auto& [key, queue] : replies_) {
      if (first_user.find(key.first) == std::string::npos || key.second != kind) continue;
      auto& pos = cursor_[key];
      const auto& text = queue[std::min(pos, queue.size() - 1)];
      ++pos;
      return {text, {}, false, 0};
    }
    throw Error(ErrorCode::kProviderError, "unscripted point");
  }

  std::vector<ChatRequest> seen;

 private:
  std::mutex mu_;
  std::map<std::pair<std::string, FacetKind>, std::vector<std::string>> replies_;
  std::map<std::pair<std::string, FacetKind>, std::size_t> cursor_;
};

ReviewPoint point(const std::string& id, Polarity pol, std::string body,
                  std::optional<std::string> header = {}) {
  ReviewPoint p;
  p.point_id = id;
  p.paper_id = "p";
  p.polarity = pol;
  p.header = std::move(header);
  p.body = std::move(body);
  p.origin = Origin::expert();
  return p;
}

TEST(Annotator, PromptSelectionByPolarity) {
  EXPECT_EQ(annotation_prompt_name(FacetKind::kTarget, Polarity::kStrength),
            "annotate_target_strength");
  EXPECT_EQ(annotation_prompt_name(FacetKind::kAspect, Polarity::kWeakness),
            "annotate_aspect_weakness");
}

TEST(Annotator, TwoCallsAtTemperatureZero) {
  LabelClient client;
  const auto p = point("p:expert:0", Polarity::kStrength,
                       "The proofs are careful and complete.", "Technically sound with a strong foundation");
  client.script("The proofs are careful", FacetKind::kTarget, {"Theory"});
  client.script("The proofs are careful", FacetKind::kAspect, {"soundness"});
  Annotator annotator(client, prompts(), kAnnotatorModel);
  const auto a = annotator.annotate_point(p);
  EXPECT_EQ(a.target, TargetFacet::kTheory);
  EXPECT_EQ(a.aspect, AspectFacet::kValidity);
  EXPECT_EQ(a.annotator_id, "o3-mini");
  EXPECT_EQ(a.point, p);
  EXPECT_EQ(json::parse(a.raw_annotator_output),
            (json{{"target", "Theory"}, {"aspect", "soundness"}}));
  ASSERT_EQ(client.seen.size(), 2u);
  for (const auto& req : client.seen) {
    EXPECT_EQ(req.temperature, 0.0);
    EXPECT_NE(req.messages[1].text.find("<strength>\n**Technically sound with a strong foundation**: "
                                        "The proofs are careful and complete.\n</strength>"),
              std::string::npos);
  }
}

TEST(Annotator, OneStricterRetryOnUnknownLabel) {
  LabelClient client;
  client.script("needs more ablations", FacetKind::kTarget, {"The experiments section", "Experiment"});
  client.script("needs more ablations", FacetKind::kAspect, {"Validity"});
  Annotator annotator(client, prompts(), kAnnotatorModel);
  const auto a = annotator.annotate_point(point("x", Polarity::kWeakness, "needs more ablations"));
  EXPECT_EQ(a.target, TargetFacet::kExperiment);
  ASSERT_EQ(client.seen.size(), 3u);
  const auto& retry = client.seen[1].messages;
  ASSERT_EQ(retry.size(), 4u);
  EXPECT_EQ(retry[2].text, "The experiments section");
  EXPECT_NE(retry[3].text.find("Problem, Prior Research, Method, Theory, Experiment, Conclusion, Paper"),
            std::string::npos);
}

TEST(Annotator, FailureAfterRetry) {
  LabelClient client;
  client.script("vague", FacetKind::kTarget, {"dunno", "still dunno"});
  client.script("vague", FacetKind::kAspect, {"Clarity"});
  Annotator annotator(client, prompts(), kAnnotatorModel);
  try {
    annotator.annotate_point(point("v1", Polarity::kWeakness, "vague"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAnnotationFailed);
    EXPECT_NE(std::string(e.what()).find("v1 (target)"), std::string::npos);
  }
  EXPECT_THROW(annotator.annotate_point(point("e", Polarity::kWeakness, "")), Error);
}

TEST(AnnotateCorpus, AlignedWithIsolatedFailures) {
  LabelClient client;
  std::vector<ReviewPoint> points;
  for (int i = 0; i < 30; ++i) {
    const std::string body = "body number " + std::to_string(i) + ".";
    points.push_back(point("id" + std::to_string(i), i % 2 ? Polarity::kWeakness : Polarity::kStrength, body));
    client.script(body, FacetKind::kTarget, {i % 7 == 3 ? "gibberish" : "Method"});
    client.script(body, FacetKind::kAspect, {"Novelty"});
  }
  Annotator annotator(client, prompts(), kAnnotatorModel);
  const auto out = annotator.annotate_corpus(points, 4);
  ASSERT_EQ(out.size(), points.size());
  std::size_t ok = 0, excluded = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].ok()) {
      ++ok;
      EXPECT_EQ(out[i].value().point.point_id, points[i].point_id);
    } else {
      ++excluded;
      EXPECT_EQ(i % 7, 3u);
      EXPECT_EQ(out[i].error().code, ErrorCode::kAnnotationFailed);
    }
  }
  EXPECT_EQ(ok + excluded, points.size());
  EXPECT_EQ(excluded, 4u);
  EXPECT_TRUE(annotator.annotate_corpus({}, 4).empty());
}

TEST(Kappa, HandExample) {
  // 10 A-A, 5 B-B, 3 A-B, 2 B-A.
  std::vector<int> a, b;
  auto add = [&](int x, int y, int times) {
    for (int i = 0; i < times; ++i) {
      a.push_back(x);
      b.push_back(y);
    }
  };
  add(0, 0, 10);
  add(1, 1, 5);
  add(0, 1, 3);
  add(1, 0, 2);
  const auto k = cohens_kappa_detail(a, b);
  EXPECT_DOUBLE_EQ(k.observed, 0.75);
  EXPECT_DOUBLE_EQ(k.expected, 0.53);
  EXPECT_EQ(k.kappa, 88.0 / 188.0);
  EXPECT_NEAR(k.kappa, 0.4681, 1e-4);
  EXPECT_FALSE(k.degenerate);
}

TEST(Kappa, IdenticalDegenerateAndErrors) {
  const std::vector<int> a = {0, 1, 2, 1, 0};
  EXPECT_EQ(cohens_kappa(a, a), 1.0);
  const std::vector<int> same = {3, 3, 3};
  const auto d = cohens_kappa_detail(same, same);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.kappa, 1.0);
  const std::vector<int> other = {4, 4, 4};
  EXPECT_FALSE(cohens_kappa_detail(same, other).degenerate);
  EXPECT_EQ(cohens_kappa(same, other), 0.0);
  try {
    cohens_kappa(std::vector<int>{1}, std::vector<int>{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
  EXPECT_THROW(cohens_kappa(std::vector<int>{}, std::vector<int>{}), Error);
  EXPECT_EQ(cohens_kappa(std::vector<std::string>{"x", "y"}, std::vector<std::string>{"y", "x"}),
            -1.0);
}

TEST(KappaProperty, RangeSymmetryRelabelingOracle) {
  Rng rng(77);
  for (int it = 0; it < testing::kPropertyIterations; ++it) {
    const std::size_t n = testing::uniform(rng, 1, 60);
    const int cats = static_cast<int>(testing::uniform(rng, 1, 7));
    std::vector<int> a(n), b(n);
    for (auto& x : a) x = static_cast<int>(testing::uniform(rng, 0, cats - 1));
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = testing::uniform(rng, 0, 2) == 0 ? a[i] : static_cast<int>(testing::uniform(rng, 0, cats - 1));
    }
    const double k = cohens_kappa(a, b);
    ASSERT_GE(k, -1.0);
    ASSERT_LE(k, 1.0);
    ASSERT_EQ(k, cohens_kappa(b, a));
    const auto exact = oracle_kappa(a, b);
    ASSERT_EQ(k, exact.value());

    std::vector<int> perm(static_cast<std::size_t>(cats));
    std::iota(perm.begin(), perm.end(), 100);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pa, pb;
    for (std::size_t i = 0; i < n; ++i) {
      pa.push_back(perm[static_cast<std::size_t>(a[i])]);
      pb.push_back(perm[static_cast<std::size_t>(b[i])]);
    }
    ASSERT_EQ(cohens_kappa(pa, pb), k);
  }
}

TEST(KappaProperty, IndependentRatersNearZero) {
  Rng rng(2024);
  std::vector<int> a(10000), b(10000);
  for (auto& x : a) x = static_cast<int>(testing::uniform(rng, 0, 6));
  for (auto& x : b) x = static_cast<int>(testing::uniform(rng, 0, 6));
  EXPECT_LT(std::abs(cohens_kappa(a, b)), 0.05);
}

AnnotatedPoint annotated(const std::string& id, TargetFacet t, AspectFacet a) {
  AnnotatedPoint p;
  p.point = point(id, Polarity::kStrength, "b");
  p.target = t;
  p.aspect = a;
  p.annotator_id = "human";
  return p;
}

TEST(ValidateAnnotator, PerfectAndConfusion) {
  std::vector<AnnotatedPoint> gold_points = {
      annotated("a", TargetFacet::kMethod, AspectFacet::kNovelty),
      annotated("b", TargetFacet::kExperiment, AspectFacet::kValidity),
      annotated("c", TargetFacet::kTheory, AspectFacet::kValidity),
      annotated("d", TargetFacet::kMethod, AspectFacet::kClarity)};
  const auto gold = gold_from_annotations(gold_points);
  const auto same = validate_annotator(gold, gold_points);
  EXPECT_EQ(same.kappa_target, 1.0);
  EXPECT_EQ(same.kappa_aspect, 1.0);

  auto pred = gold_points;
  std::reverse(pred.begin(), pred.end());
  pred[0].target = TargetFacet::kExperiment;  // "d": Method -> Experiment
  const auto r = validate_annotator(gold, pred);
  EXPECT_EQ(r.n_items, 4u);
  EXPECT_LT(r.kappa_target, 1.0);
  EXPECT_EQ(r.kappa_aspect, 1.0);
  const auto m = static_cast<std::size_t>(TargetFacet::kMethod);
  const auto e = static_cast<std::size_t>(TargetFacet::kExperiment);
  EXPECT_EQ(r.target_confusion.counts[m][e], 1u);
  EXPECT_EQ(r.target_confusion.counts[m][m], 1u);
  for (const auto* cm : {&r.target_confusion, &r.aspect_confusion}) {
    std::size_t total = 0;
    for (const auto& row : cm->counts) {
      for (auto c : row) total += c;
    }
    EXPECT_EQ(total, r.n_items);
  }
  const auto j = irr_report_json(r);
  EXPECT_EQ(j["confusion"]["target"]["labels"][1], "prior_research");
  EXPECT_EQ(j["confusion"]["aspect"]["counts"].size(), 5u);

  pred.pop_back();
  try {
    validate_annotator(gold, pred);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kMissingPrediction);
    EXPECT_NE(std::string(err.what()).find("a"), std::string::npos);
  }
}

}  // namespace
}  // namespace revfocus
