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

#include <fstream>

#include "revfocus/config.hpp"

namespace revfocus {
namespace {

namespace fs = std::filesystem;

const std::map<std::string, std::string> kBase = {
    {"endpoint.openai.base_url", "https://api.openai.com/v1"},
    {"endpoint.openai.dialect", "openai"},
    {"model.gpt-4o.endpoint", "openai"},
    {"model.o3-mini.endpoint", "openai"},
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kUnknownLabel;
}

TEST(KeyValues, CommentsBlankLinesAndLastWins) {
  const auto kv = parse_key_values("# run\n\n a = 1 \nb=two words # note\na = 3\n");
  EXPECT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("a"), "3");
  EXPECT_EQ(kv.at("b"), "two words");
}

TEST(KeyValues, MalformedLineNamesTheLine) {
  try {
    parse_key_values("a = 1\nnot a pair\n", "run.conf");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    EXPECT_NE(std::string(e.what()).find("run.conf line 2"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse_key_values(" = 1\n"); }), ErrorCode::kConfigError);
}

TEST(RunConfig, Defaults) {
  const auto c = RunConfig::from_key_values({}, "/base");
  EXPECT_EQ(c.run_dir, fs::path("/base/run"));
  EXPECT_EQ(c.prompts_dir, fs::path("/base/prompts"));
  EXPECT_DOUBLE_EQ(c.expert_temperature, 0.0);
  EXPECT_DOUBLE_EQ(c.generation_temperature, 1.0);
  EXPECT_DOUBLE_EQ(c.annotation_temperature, 0.0);
  EXPECT_DOUBLE_EQ(c.loss_threshold, 0.05);
  EXPECT_EQ(c.kl_direction, KlDirection::kHumanToModel);
  EXPECT_EQ(c.match_mode, MatchMode::kMultiset);
  EXPECT_EQ(c.label_match, LabelMatch::kProjected);
  EXPECT_EQ(c.text_candidate, TextCandidate::kRawText);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, ParsesEveryGroup) {
  auto kv = kBase;
  kv.insert({{"run_dir", "/abs/run"},
             {"corpus.exports", "a.jsonl, b.jsonl"},
             {"corpus.schema", "openreview_v1"},
             {"corpus.key_map", "keys.json"},
             {"corpus.strict", "yes"},
             {"corpus.year_min", "2017"},
             {"corpus.year_max", "2024"},
             {"corpus.decisions", "accepted, rejected"},
             {"corpus.sample_fraction", "0.25"},
             {"corpus.sample_seed", "7"},
             {"cache.dir", "cache"},
             {"cache.offline", "true"},
             {"endpoint.openai.rpm", "60"},
             {"endpoint.openai.max_parallel", "3"},
             {"model.gpt-4o.provider_model", "gpt-4o-2024-08-06"},
             {"generation.models", "gpt-4o"},
             {"generation.max_paper_tokens", "100"},
             {"expert.model", "gpt-4o"},
             {"annotator.model", "o3-mini"},
             {"parallelism", "8"},
             {"irr.gold", "gold.jsonl"},
             {"irr.kappa_floor", "0.7"},
             {"metrics.epsilon", "1e-6"},
             {"metrics.kl_direction", "model_to_human"},
             {"metrics.match_mode", "set"},
             {"metrics.label_match", "pair_attributed"},
             {"metrics.text_candidate", "parsed_points"},
             {"loss_threshold", "0.1"}});
  const auto c = RunConfig::from_key_values(kv, "/cfg");
  EXPECT_EQ(c.run_dir, fs::path("/abs/run"));
  ASSERT_EQ(c.exports.size(), 2u);
  EXPECT_EQ(c.exports[1], fs::path("/cfg/b.jsonl"));
  EXPECT_EQ(c.schema, ExportSchema::kOpenReviewV1);
  EXPECT_EQ(*c.key_map, fs::path("/cfg/keys.json"));
  EXPECT_TRUE(c.strict);
  EXPECT_EQ(*c.year_min, 2017);
  EXPECT_EQ(c.decisions.size(), 2u);
  EXPECT_DOUBLE_EQ(c.sample_fraction, 0.25);
  EXPECT_EQ(*c.sample_seed, 7u);
  EXPECT_TRUE(c.offline);
  EXPECT_EQ(c.endpoints.at("openai").rpm_limit, 60);
  EXPECT_EQ(c.endpoints.at("openai").max_parallel, 3);
  EXPECT_EQ(c.models.at("gpt-4o").provider_model, "gpt-4o-2024-08-06");
  EXPECT_EQ(c.models.at("o3-mini").provider_model, "o3-mini");
  EXPECT_EQ(c.max_paper_tokens, 100u);
  EXPECT_EQ(c.parallelism, 8u);
  EXPECT_DOUBLE_EQ(*c.kappa_floor, 0.7);
  EXPECT_DOUBLE_EQ(c.epsilon, 1e-6);
  EXPECT_EQ(c.kl_direction, KlDirection::kModelToHuman);
  EXPECT_EQ(c.match_mode, MatchMode::kSet);
  EXPECT_EQ(c.label_match, LabelMatch::kPairAttributed);
  EXPECT_EQ(c.text_candidate, TextCandidate::kParsedPoints);
  EXPECT_NO_THROW(c.validate());

  const auto m = c.stage_model("gpt-4o", 1.0);
  EXPECT_EQ(m.endpoint_id, "openai");
  EXPECT_EQ(m.model_id, "gpt-4o-2024-08-06");
  EXPECT_EQ(m.output_id(), "gpt-4o");
  EXPECT_DOUBLE_EQ(m.temperature, 1.0);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"corpus.exprots", "a"},
           {"parallelism", "four"},
           {"corpus.strict", "maybe"},
           {"metrics.kl_direction", "sideways"},
           {"corpus.decisions", "accepted,maybe"},
           {"endpoint.openai.colour", "blue"},
           {"endpoint.openai", "x"},
           {"model.gpt-4o.temperature", "0"},
           {"metrics.epsilon", "1e-6x"}}) {
    auto kv = kBase;
    kv[k] = v;
    EXPECT_EQ(code_of([&] { RunConfig::from_key_values(kv); }), ErrorCode::kConfigError) << k;
  }
}

TEST(RunConfig, ValidateCatchesUnconfiguredModels) {
  auto check = [](std::map<std::string, std::string> kv) {
    return code_of([&] { RunConfig::from_key_values(kv).validate(); });
  };
  auto kv = kBase;
  kv["generation.models"] = "gpt-4o, llama-3.1-70b";
  EXPECT_EQ(check(kv), ErrorCode::kConfigError);
  kv = kBase;
  kv["annotator.model"] = "claude";
  EXPECT_EQ(check(kv), ErrorCode::kConfigError);
  kv = kBase;
  kv["model.x.endpoint"] = "nowhere";
  EXPECT_EQ(check(kv), ErrorCode::kConfigError);
  kv = kBase;
  kv["model.human.endpoint"] = "openai";
  EXPECT_EQ(check(kv), ErrorCode::kConfigError);
  kv = kBase;
  kv["endpoint.other.dialect"] = "openai";
  EXPECT_EQ(check(kv), ErrorCode::kConfigError);
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"corpus.sample_fraction", "0"},
           {"corpus.sample_fraction", "1.5"},
           {"metrics.epsilon", "0"},
           {"parallelism", "0"},
           {"loss_threshold", "2"},
           {"generation.temperature", "-1"}}) {
    kv = kBase;
    kv[k] = v;
    EXPECT_EQ(check(kv), ErrorCode::kConfigError) << k << "=" << v;
  }
  EXPECT_EQ(code_of([] { RunConfig::from_key_values(kBase).stage_model("gpt-5", 0); }),
            ErrorCode::kConfigError);
}

TEST(RunConfig, LoadAppliesOverridesAndResolvesAgainstFileDir) {
  const auto dir = fs::temp_directory_path() / "revfocus_config_test";
  fs::create_directories(dir);
  const auto path = dir / "run.conf";
  {
    std::ofstream out(path);
    for (const auto& [k, v] : kBase) out << k << " = " << v << "\n";
    out << "run_dir = out\nparallelism = 2\n";
  }
  const auto c = RunConfig::load(path, {{"parallelism", "6"}});
  EXPECT_EQ(c.run_dir, dir / "out");
  EXPECT_EQ(c.parallelism, 6u);
  EXPECT_EQ(code_of([&] { RunConfig::load(path, {{"generation.models", "nope"}}); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([&] { RunConfig::load(dir / "missing.conf"); }), ErrorCode::kConfigError);
  EXPECT_EQ(code_of([&] { c.require_path(dir / "absent", "export"); }), ErrorCode::kConfigError);
  fs::remove_all(dir);
}

TEST(TextCandidate, RoundTrip) {
  for (auto c : {TextCandidate::kRawText, TextCandidate::kParsedPoints}) {
    EXPECT_EQ(text_candidate_from_id(to_string(c)), c);
  }
  EXPECT_THROW(text_candidate_from_id("summary"), Error);
}

}  // namespace
}  // namespace revfocus
