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

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <mutex>
#include <thread>

#include "generators.hpp"
#include "revfocus/gateway.hpp"

namespace revfocus {
namespace {

using testing::Rng;

std::string openai_reply(const std::string& text) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})},
              {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}}
      .dump();
}

// Replays scripted responses and records every request it sees.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::deque<HttpResponse> script) : script_(std::move(script)) {}

  HttpResponse post(const HttpRequest& req) override {
    std::lock_guard lock(mu_);
    seen.push_back(req);
    if (script_.empty()) return {200, openai_reply("default"), false, ""};
    auto r = script_.front();
    script_.pop_front();
    return r;
  }

  std::vector<HttpRequest> seen;

 private:
  std::mutex mu_;
  std::deque<HttpResponse> script_;
};

EndpointConfig endpoint(const std::string& id = "openai") {
  EndpointConfig e;
  e.id = id;
  e.base_url = "https://api.example.test/v1/";
  e.retry_cap = 4;
  return e;
}

GatewayOptions quiet_options(std::vector<double>* sleeps = nullptr) {
  GatewayOptions o;
  o.getenv = [](const std::string& name) -> std::optional<std::string> {
    if (name == "OPENAI_API_KEY" || name == "ANTHROPIC_API_KEY") return "sk-test";
    return std::nullopt;
  };
  o.sleep = [sleeps](double s) {
    if (sleeps) sleeps->push_back(s);
  };
  return o;
}

ChatRequest request(const std::string& text = "hello") {
  ChatRequest r;
  r.endpoint_id = "openai";
  r.model_id = "gpt-4o";
  r.messages = {{Role::kSystem, "You are careful."}, {Role::kUser, text}};
  return r;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(CacheKey, StableUnderConstructionOrder) {
  ChatRequest a;
  a.endpoint_id = "e";
  a.model_id = "m";
  a.messages = {{Role::kUser, "q"}};
  a.temperature = 0.5;
  a.max_output_tokens = 99;

  ChatRequest b;
  b.max_output_tokens = 99;
  b.temperature = 0.5;
  b.messages.push_back({Role::kUser, "q"});
  b.model_id = "m";
  b.endpoint_id = "e";
  b.response_hint = ResponseHint::kStructured;  // not part of the identity

  EXPECT_EQ(cache_key(a), cache_key(b));
  EXPECT_EQ(cache_key(a).size(), 64u);
}

TEST(CacheKeyProperty, AnyFieldChangeChangesKey) {
  Rng rng(17);
  for (int it = 0; it < testing::kPropertyIterations; ++it) {
    ChatRequest base;
    base.endpoint_id = testing::random_word(rng);
    base.model_id = testing::random_word(rng);
    base.messages = {{Role::kUser, testing::random_text(rng)}};
    base.temperature = static_cast<double>(testing::uniform(rng, 0, 20)) / 10.0;
    base.max_output_tokens = static_cast<int>(testing::uniform(rng, 1, 4096));
    const auto k = cache_key(base);
    EXPECT_EQ(k, cache_key(ChatRequest(base)));

    auto c = base;
    c.endpoint_id += "x";
    EXPECT_NE(cache_key(c), k);
    c = base;
    c.model_id += "x";
    EXPECT_NE(cache_key(c), k);
    c = base;
    c.messages[0].text += "x";
    EXPECT_NE(cache_key(c), k);
    c = base;
    c.messages[0].role = Role::kSystem;
    EXPECT_NE(cache_key(c), k);
    c = base;
    c.messages.push_back({Role::kAssistant, ""});
    EXPECT_NE(cache_key(c), k);
    c = base;
    c.temperature += 0.05;
    EXPECT_NE(cache_key(c), k);
    c = base;
    c.max_output_tokens += 1;
    EXPECT_NE(cache_key(c), k);
  }
}

TEST(ChatRequest, Validation) {
  auto r = request();
  EXPECT_NO_THROW(r.validate());
  r.messages.clear();
  EXPECT_THROW(r.validate(), Error);
  r = request();
  r.temperature = std::nan("");
  EXPECT_THROW(r.validate(), Error);
  r = request();
  r.max_output_tokens = 0;
  EXPECT_THROW(r.validate(), Error);
}

TEST(Gateway, SecondIdenticalRequestIsCached) {
  auto transport = std::make_shared<ScriptedTransport>(
      std::deque<HttpResponse>{{200, openai_reply("Answer é\n"), false, ""}});
  auto opts = quiet_options();
  opts.cache_dir = fresh_dir("revfocus_gateway_cache");
  Gateway gw({endpoint()}, transport, opts);
  const auto first = gw.complete(request());
  const auto second = gw.complete(request());
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(first.text, second.text);
  EXPECT_EQ(first.usage, second.usage);
  EXPECT_EQ(transport->seen.size(), 1u);

  // A fresh gateway over the same directory rebuilds its index by scanning.
  Gateway again({endpoint()}, std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{}),
                opts);
  EXPECT_TRUE(again.complete(request()).cached);
  const auto key = cache_key(request());
  EXPECT_TRUE(std::filesystem::exists(*opts.cache_dir / key.substr(0, 2) / (key + ".json")));
}

TEST(Gateway, RetriesTwo429sThenSucceeds) {
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{
      {429, "slow down", false, ""}, {429, "slow down", false, ""}, {200, openai_reply("ok"), false, ""}});
  std::vector<double> sleeps;
  Gateway gw({endpoint()}, transport, quiet_options(&sleeps));
  const auto r = gw.complete(request());
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(transport->seen.size(), 3u);
  EXPECT_EQ(gw.stats().http_attempts, 3u);
  EXPECT_EQ(gw.stats().retries, 2u);
  ASSERT_EQ(sleeps.size(), 2u);
  // Exponential backoff with jitter in [0.5, 1] of the nominal delay.
  EXPECT_GE(sleeps[0], 0.25);
  EXPECT_LE(sleeps[0], 0.5);
  EXPECT_GE(sleeps[1], 0.5);
  EXPECT_LE(sleeps[1], 1.0);
}

TEST(Gateway, ErrorsAreDistinct) {
  auto run = [](std::deque<HttpResponse> script) {
    Gateway gw({endpoint()}, std::make_shared<ScriptedTransport>(std::move(script)),
               quiet_options());
    try {
      gw.complete(request());
    } catch (const ProviderFailure& e) {
      return std::make_pair(e.code(), e.status());
    }
    return std::make_pair(ErrorCode::kInvalidArgument, -1);
  };
  const HttpResponse r429{429, "", false, ""};
  const HttpResponse r503{503, "", false, ""};
  const HttpResponse timeout{0, "", true, "read timeout"};
  EXPECT_EQ(run({r429, r429, r429, r429}), std::make_pair(ErrorCode::kRateLimited, 429));
  EXPECT_EQ(run({r503, r503, r503, r503}), std::make_pair(ErrorCode::kProviderError, 503));
  EXPECT_EQ(run({timeout, timeout, timeout, timeout}), std::make_pair(ErrorCode::kTimeout, 0));
  EXPECT_EQ(run({{401, "", false, ""}}), std::make_pair(ErrorCode::kAuthError, 401));
  EXPECT_EQ(run({{400, "bad", false, ""}}), std::make_pair(ErrorCode::kProviderError, 400));
  EXPECT_EQ(run({{200, "not json", false, ""}}).first, ErrorCode::kProviderError);
}

TEST(Gateway, NonTransientErrorsAreNotRetried) {
  auto transport = std::make_shared<ScriptedTransport>(
      std::deque<HttpResponse>{{403, "", false, ""}, {200, openai_reply("late"), false, ""}});
  Gateway gw({endpoint()}, transport, quiet_options());
  EXPECT_THROW(gw.complete(request()), ProviderFailure);
  EXPECT_EQ(transport->seen.size(), 1u);
}

TEST(Gateway, MissingCredentialFailsBeforeNetwork) {
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{});
  auto opts = quiet_options();
  opts.getenv = [](const std::string&) { return std::optional<std::string>{}; };
  Gateway gw({endpoint()}, transport, opts);
  try {
    gw.complete(request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuthError);
    EXPECT_NE(std::string(e.what()).find("OPENAI_API_KEY"), std::string::npos);
  }
  EXPECT_TRUE(transport->seen.empty());
}

TEST(Gateway, OfflineMissIsCacheMiss) {
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{});
  auto opts = quiet_options();
  opts.cache_dir = fresh_dir("revfocus_gateway_offline");
  opts.offline = true;
  Gateway gw({endpoint()}, transport, opts);
  try {
    gw.complete(request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCacheMiss);
  }
  EXPECT_TRUE(transport->seen.empty());
}

TEST(Gateway, UnknownEndpointIsConfigError) {
  Gateway gw({endpoint()}, std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{}),
             quiet_options());
  auto r = request();
  r.endpoint_id = "nowhere";
  try {
    gw.complete(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

TEST(Wire, OpenAiMessagesUnchanged) {
  const auto req = request("Line one\n\"quoted\" {braces}");
  const auto http = build_http_request(endpoint(), req, "sk-test");
  EXPECT_EQ(http.url, "https://api.example.test/v1/chat/completions");
  const auto body = json::parse(http.body);
  ASSERT_EQ(body["messages"].size(), req.messages.size());
  for (std::size_t i = 0; i < req.messages.size(); ++i) {
    EXPECT_EQ(body["messages"][i]["role"], to_string(req.messages[i].role));
    EXPECT_EQ(body["messages"][i]["content"], req.messages[i].text);
  }
  EXPECT_EQ(body["model"], "gpt-4o");
  EXPECT_EQ(body["max_tokens"], req.max_output_tokens);
  bool auth = false;
  for (const auto& [k, v] : http.headers) auth |= (k == "Authorization" && v == "Bearer sk-test");
  EXPECT_TRUE(auth);
}

TEST(Wire, AnthropicMovesSystemPrompt) {
  auto e = endpoint("anthropic");
  e.dialect = Dialect::kAnthropic;
  e.base_url = "https://api.anthropic.test";
  const auto req = request("hi");
  const auto http = build_http_request(e, req, "key");
  EXPECT_EQ(http.url, "https://api.anthropic.test/v1/messages");
  const auto body = json::parse(http.body);
  EXPECT_EQ(body["system"], "You are careful.");
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["content"], "hi");
  const auto reply = parse_http_response(
      Dialect::kAnthropic,
      R"({"content":[{"type":"text","text":"a"},{"type":"text","text":"b"}],"usage":{"input_tokens":5,"output_tokens":2}})");
  EXPECT_EQ(reply.text, "ab");
  EXPECT_EQ(reply.usage.prompt_tokens, 5);
}

TEST(Wire, ReasoningModelFields) {
  auto e = endpoint();
  e.max_tokens_field = "max_completion_tokens";
  e.send_temperature = false;
  const auto body = json::parse(build_http_request(e, request(), "k").body);
  EXPECT_TRUE(body.contains("max_completion_tokens"));
  EXPECT_FALSE(body.contains("max_tokens"));
  EXPECT_FALSE(body.contains("temperature"));
}

TEST(Wire, CredentialVariableName) {
  EXPECT_EQ(credential_env_var("openai"), "OPENAI_API_KEY");
  EXPECT_EQ(credential_env_var("together-ai.v2"), "TOGETHER_AI_V2_API_KEY");
}

// Counts how many calls overlap; fails the request whose text is "fail".
class InstrumentedClient : public ChatClient {
 public:
  ChatResponse complete(const ChatRequest& req) override {
    const int now = ++active_;
    int prev = max_seen.load();
    while (now > prev && !max_seen.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --active_;
    if (req.messages.back().text == "fail") {
      throw ProviderFailure(ErrorCode::kProviderError, 500, "scripted failure");
    }
    return {"echo:" + req.messages.back().text, {}, false, 0};
  }

  std::atomic<int> max_seen{0};

 private:
  std::atomic<int> active_{0};
};

TEST(CompleteBatch, AlignedAndBounded) {
  InstrumentedClient client;
  std::vector<ChatRequest> reqs;
  for (int i = 0; i < 10; ++i) reqs.push_back(request(std::to_string(i)));
  const auto out = complete_batch(client, reqs, 3);
  ASSERT_EQ(out.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    ASSERT_TRUE(out[i].ok());
    EXPECT_EQ(out[i].value().text, "echo:" + std::to_string(i));
  }
  EXPECT_LE(client.max_seen.load(), 3);
  EXPECT_GE(client.max_seen.load(), 1);
}

TEST(CompleteBatch, FailureIsolatedAtIndex) {
  InstrumentedClient client;
  std::vector<ChatRequest> reqs;
  for (int i = 0; i < 10; ++i) reqs.push_back(request(i == 6 ? "fail" : std::to_string(i)));
  const auto out = complete_batch(client, reqs, 4);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(out[i].ok(), i != 6);
  EXPECT_EQ(out[6].error().code, ErrorCode::kProviderError);
  EXPECT_EQ(out[6].error().status, 500);
}

TEST(CompleteBatch, EmptyAndZeroParallelism) {
  InstrumentedClient client;
  EXPECT_TRUE(complete_batch(client, {}, 2).empty());
  EXPECT_THROW(complete_batch(client, {request()}, 0), Error);
}

// Blocks inside post() so that the test can observe the in-flight bound.
class SlowTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest&) override {
    const int now = ++active_;
    int prev = max_seen.load();
    while (now > prev && !max_seen.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --active_;
    return {200, openai_reply("ok"), false, ""};
  }
  std::atomic<int> max_seen{0};

 private:
  std::atomic<int> active_{0};
};

TEST(Gateway, EndpointInflightBound) {
  auto transport = std::make_shared<SlowTransport>();
  auto e = endpoint();
  e.max_parallel = 2;
  Gateway gw({e}, transport, quiet_options());
  std::vector<ChatRequest> reqs;
  for (int i = 0; i < 12; ++i) reqs.push_back(request(std::to_string(i)));
  const auto out = complete_batch(gw, reqs, 6);
  for (const auto& r : out) EXPECT_TRUE(r.ok());
  EXPECT_LE(transport->max_seen.load(), 2);
}

TEST(TokenBucket, EnforcesRequestsPerMinute) {
  double clock = 0.0;
  std::vector<double> sleeps;
  TokenBucket bucket(
      60.0, [&] { return clock; },
      [&](double s) {
        sleeps.push_back(s);
        clock += s;
      });
  for (int i = 0; i < 5; ++i) bucket.acquire();
  // One token per second: the first call is free, the rest each wait ~1 s.
  EXPECT_NEAR(clock, 4.0, 1e-9);
}

}  // namespace
}  // namespace revfocus
