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

#include <filesystem>

#include "generators.hpp"
#include "revfocus/error.hpp"
#include "revfocus/serialize.hpp"
#include "revfocus/stage_io.hpp"
#include "revfocus/types.hpp"

namespace revfocus {
namespace {

using testing::Rng;

template <class T>
T round_trip(const T& v) {
  return json::parse(json(v).dump()).get<T>();
}

TEST(Types, DisplayTextJoinsHeader) {
  ReviewPoint p;
  p.body = "The method is sound.";
  EXPECT_EQ(p.display_text(), "The method is sound.");
  p.header = "Sound method";
  EXPECT_EQ(p.display_text(), "**Sound method**: The method is sound.");
}

TEST(Types, OriginGroupIds) {
  EXPECT_TRUE(Origin::expert().is_expert());
  EXPECT_EQ(Origin::expert().group_id(), "human");
  EXPECT_EQ(Origin::model("gpt-4o").group_id(), "gpt-4o");
}

TEST(Types, DistributionFromCounts) {
  const auto d = FocusDistribution::from_counts(FacetKind::kTarget, Polarity::kStrength,
                                                {0, 0, 2, 1, 1, 0, 0});
  EXPECT_EQ(d.support(), 4u);
  EXPECT_DOUBLE_EQ(d.weight(TargetFacet::kMethod), 0.5);
  EXPECT_DOUBLE_EQ(d.weight(TargetFacet::kTheory), 0.25);
  EXPECT_DOUBLE_EQ(d.weight(TargetFacet::kExperiment), 0.25);
  EXPECT_EQ(d.weights().size(), 7u);
}

TEST(Types, ZeroSupportIsRepresentable) {
  const auto d = FocusDistribution::from_counts(FacetKind::kAspect, Polarity::kWeakness,
                                                std::vector<std::size_t>(5, 0));
  EXPECT_EQ(d.support(), 0u);
  for (double w : d.weights()) EXPECT_EQ(w, 0.0);
}

TEST(Types, FromWeightsValidates) {
  EXPECT_THROW(FocusDistribution::from_weights(FacetKind::kAspect, Polarity::kStrength,
                                               {0.5, 0.6, 0, 0, 0}, 3),
               Error);
  EXPECT_THROW(FocusDistribution::from_weights(FacetKind::kAspect, Polarity::kStrength,
                                               {1.5, -0.5, 0, 0, 0}, 3),
               Error);
  EXPECT_THROW(FocusDistribution::from_weights(FacetKind::kAspect, Polarity::kStrength,
                                               {1.0, 0, 0}, 3),
               Error);
  EXPECT_NO_THROW(FocusDistribution::from_weights(FacetKind::kAspect, Polarity::kStrength,
                                                  {0.2, 0.2, 0.2, 0.2, 0.2}, 5));
}

TEST(TypesProperty, WeightsSumToOneAndNonNegative) {
  Rng rng(11);
  for (int it = 0; it < testing::kPropertyIterations; ++it) {
    for (auto kind : kAllFacetKinds) {
      std::vector<std::size_t> counts(vocabulary_size(kind));
      for (auto& c : counts) c = testing::uniform(rng, 0, 40);
      counts[testing::uniform(rng, 0, counts.size() - 1)] += 1;
      const auto d = FocusDistribution::from_counts(kind, Polarity::kStrength, counts);
      double sum = 0.0;
      for (double w : d.weights()) {
        EXPECT_GE(w, 0.0);
        sum += w;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(TypesProperty, SerializationRoundTrip) {
  Rng rng(7);
  for (int it = 0; it < testing::kPropertyIterations; ++it) {
    const Origin origin = testing::uniform(rng, 0, 1) ? Origin::expert()
                                                      : Origin::model(testing::random_word(rng));
    const auto a = testing::random_annotated(rng, "p" + testing::random_word(rng), it, origin);
    EXPECT_EQ(round_trip(a.point), a.point);
    EXPECT_EQ(round_trip(a), a);

    PaperRecord r{testing::random_word(rng), testing::random_text(rng),
                  static_cast<int>(2020 + testing::uniform(rng, 0, 5)),
                  static_cast<Decision>(testing::uniform(rng, 0, 2)), testing::random_text(rng),
                  {{"k", testing::random_text(rng)}}};
    EXPECT_EQ(round_trip(r), r);

    ReviewBundle b{r.paper_id, testing::random_text(rng),
                   {{"r1", testing::random_text(rng)}, {"r2", testing::random_text(rng)}}};
    EXPECT_EQ(round_trip(b), b);

    GeneratedReview g;
    g.paper_id = r.paper_id;
    g.model_id = "m";
    g.raw_text = testing::random_text(rng);
    g.parsed = {a.point};
    g.parse_mode = testing::uniform(rng, 0, 1) ? std::optional(ParseMode::kFallbackMarkdown)
                                               : std::nullopt;
    g.parse_failed = !g.parse_mode.has_value();
    g.prompt_manifest_hash = "abc";
    EXPECT_EQ(round_trip(g), g);

    DraftPoint d{testing::random_polarity(rng), testing::random_text(rng), DraftStage::kAugmented};
    EXPECT_EQ(round_trip(d), d);

    std::vector<std::size_t> counts(7);
    for (auto& c : counts) c = testing::uniform(rng, 0, 9);
    counts[0] += 1;
    const auto dist = FocusDistribution::from_counts(FacetKind::kTarget, Polarity::kWeakness,
                                                     counts);
    EXPECT_EQ(round_trip(dist), dist);
  }
}

TEST(Types, ReviewPointSchema) {
  ReviewPoint p{"p1:expert:0", "p1", Polarity::kWeakness, std::nullopt, "Weak baselines.",
                Origin::expert()};
  const json j = p;
  EXPECT_EQ(j.at("polarity"), "weakness");
  EXPECT_EQ(j.at("origin"), "expert");
  EXPECT_TRUE(j.at("header").is_null());
  EXPECT_FALSE(j.contains("model_id"));
  p.origin = Origin::model("o1");
  EXPECT_EQ(json(p).at("model_id"), "o1");
}

TEST(Types, ProfileRejectsDuplicateQuadrants) {
  FocusProfile p;
  p.group_id = "human";
  for (int i = 0; i < 4; ++i) {
    p.distributions.push_back(FocusDistribution(FacetKind::kTarget, Polarity::kStrength));
  }
  EXPECT_ANY_THROW(round_trip(p));
}

TEST(StageIo, PersistLoadIdentity) {
  Rng rng(3);
  const auto dir = std::filesystem::temp_directory_path() / "revfocus_stage_io_test";
  std::filesystem::create_directories(dir);
  for (int it = 0; it < 50; ++it) {
    const auto points = testing::random_annotations(rng, 4, 5, Origin::model("m"));
    const auto entry = persist_stage(points, dir / "annotations.jsonl");
    EXPECT_EQ(entry.count, points.size());
    EXPECT_EQ(load_stage<AnnotatedPoint>(dir / "annotations.jsonl"), points);
    EXPECT_EQ(entry.sha256, sha256_hex(read_file(dir / "annotations.jsonl")));
  }
  std::filesystem::remove_all(dir);
}

TEST(StageIo, RejectsOtherSchemaVersions) {
  try {
    decode_stage("{\"schema_version\":2,\"x\":1}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  try {
    decode_stage("{\"schema_version\":1}\nnot json\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRecord);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(StageIo, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace revfocus
