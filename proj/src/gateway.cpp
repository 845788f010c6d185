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

#include "revfocus/gateway.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <spdlog/spdlog.h>

#include "revfocus/parallel.hpp"
#include "revfocus/stage_io.hpp"

namespace revfocus {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role role_from_id(std::string_view id) {
  if (id == "system") return Role::kSystem;
  if (id == "user") return Role::kUser;
  if (id == "assistant") return Role::kAssistant;
  throw Error(ErrorCode::kInvalidArgument, "role '" + std::string(id) + "'");
}

Dialect dialect_from_id(std::string_view id) {
  if (id == "openai") return Dialect::kOpenAI;
  if (id == "anthropic") return Dialect::kAnthropic;
  throw Error(ErrorCode::kConfigError, "unknown dialect '" + std::string(id) + "'");
}

void ChatRequest::validate() const {
  if (messages.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "chat request has no messages");
  }
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be finite and >= 0");
  }
  if (max_output_tokens <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_output_tokens must be positive");
  }
}

std::string canonical_request(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"text", m.text}});
  }
  // nlohmann's default object type is a std::map: keys serialize sorted.
  json j = {{"endpoint_id", req.endpoint_id},
            {"model_id", req.model_id},
            {"messages", std::move(messages)},
            {"temperature", req.temperature},
            {"max_output_tokens", req.max_output_tokens}};
  return j.dump();
}

std::string cache_key(const ChatRequest& req) {
  return sha256_hex(canonical_request(req));
}

std::vector<Result<ChatResponse>> complete_batch(
    ChatClient& client, const std::vector<ChatRequest>& reqs,
    std::size_t parallelism) {
  if (parallelism == 0) {
    throw Error(ErrorCode::kInvalidArgument, "parallelism must be >= 1");
  }
  std::vector<std::optional<Result<ChatResponse>>> slots(reqs.size());
  parallel_for(reqs.size(), parallelism, [&](std::size_t i) {
    try {
      slots[i].emplace(client.complete(reqs[i]));
    } catch (const std::exception& e) {
      slots[i].emplace(error_info(e));
    }
  });
  std::vector<Result<ChatResponse>> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string credential_env_var(std::string_view endpoint_id) {
  std::string name;
  for (unsigned char c : endpoint_id) {
    name.push_back(std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_');
  }
  return name + "_API_KEY";
}

HttpRequest build_http_request(const EndpointConfig& endpoint,
                               const ChatRequest& req,
                               const std::string& api_key) {
  HttpRequest http;
  http.timeout_s = endpoint.timeout_s;
  http.headers.emplace_back("Content-Type", "application/json");
  std::string base = endpoint.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();

  json body;
  body["model"] = req.model_id;
  if (endpoint.dialect == Dialect::kOpenAI) {
    http.url = base + "/chat/completions";
    if (!api_key.empty()) http.headers.emplace_back("Authorization", "Bearer " + api_key);
    json messages = json::array();
    for (const auto& m : req.messages) {
      messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
    }
    body["messages"] = std::move(messages);
    body[endpoint.max_tokens_field] = req.max_output_tokens;
    if (endpoint.send_temperature) body["temperature"] = req.temperature;
  } else {
    http.url = base + "/v1/messages";
    if (!api_key.empty()) http.headers.emplace_back("x-api-key", api_key);
    http.headers.emplace_back("anthropic-version", "2023-06-01");
    json messages = json::array();
    std::string system;
    for (const auto& m : req.messages) {
      if (m.role == Role::kSystem) {
        if (!system.empty()) system += "\n\n";
        system += m.text;
        continue;
      }
      messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
    }
    if (!system.empty()) body["system"] = system;
    body["messages"] = std::move(messages);
    body["max_tokens"] = req.max_output_tokens;
    if (endpoint.send_temperature) body["temperature"] = req.temperature;
  }
  http.body = body.dump();
  return http;
}

ChatResponse parse_http_response(Dialect dialect, const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ProviderFailure(ErrorCode::kProviderError, 200, "reply is not a JSON object");
  }
  ChatResponse resp;
  try {
    if (dialect == Dialect::kOpenAI) {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      resp.text = content.is_string() ? content.get<std::string>() : "";
      if (j.contains("usage")) {
        resp.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        resp.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
      }
    } else {
      for (const auto& block : j.at("content")) {
        if (block.value("type", "") == "text") resp.text += block.value("text", "");
      }
      if (j.contains("usage")) {
        resp.usage.prompt_tokens = j["usage"].value("input_tokens", 0);
        resp.usage.completion_tokens = j["usage"].value("output_tokens", 0);
      }
    }
  } catch (const json::exception& e) {
    throw ProviderFailure(ErrorCode::kProviderError, 200,
                          std::string("unexpected reply shape: ") + e.what());
  }
  if (resp.text.empty()) {
    throw ProviderFailure(ErrorCode::kProviderError, 200, "reply has no text");
  }
  return resp;
}

// --- cache -----------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  rebuild_index();
}

void ResponseCache::rebuild_index() {
  std::lock_guard lock(mu_);
  index_.clear();
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      index_.insert(entry.path().stem().string());
    }
  }
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
  {
    std::lock_guard lock(mu_);
    if (index_.count(key) == 0) return std::nullopt;
  }
  json j = json::parse(read_file(entry_path(key)), nullptr, false);
  if (j.is_discarded() || !j.contains("response")) {
    spdlog::warn("ignoring corrupt cache entry {}", key);
    return std::nullopt;
  }
  const auto& r = j["response"];
  ChatResponse resp;
  resp.text = r.at("text").get<std::string>();
  resp.usage.prompt_tokens = r.value("prompt_tokens", std::int64_t{0});
  resp.usage.completion_tokens = r.value("completion_tokens", std::int64_t{0});
  resp.latency_ms = r.value("latency_ms", std::int64_t{0});
  resp.cached = true;
  return resp;
}

void ResponseCache::put(const std::string& key, const ChatRequest& req,
                        const ChatResponse& resp) {
  json j = {{"key", key},
            {"request", json::parse(canonical_request(req))},
            {"response",
             {{"text", resp.text},
              {"prompt_tokens", resp.usage.prompt_tokens},
              {"completion_tokens", resp.usage.completion_tokens},
              {"latency_ms", resp.latency_ms}}}};
  write_file_atomic(entry_path(key), j.dump(2) + "\n");
  std::lock_guard lock(mu_);
  index_.insert(key);
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

// --- flow control ----------------------------------------------------------

TokenBucket::TokenBucket(double rpm, NowFn now, SleepFn sleep)
    : rate_per_s_(rpm / 60.0),
      capacity_(std::max(1.0, std::floor(rpm / 60.0))),
      tokens_(capacity_),
      last_(now()),
      now_(std::move(now)),
      sleep_(std::move(sleep)) {}

void TokenBucket::acquire() {
  std::unique_lock lock(mu_);
  for (;;) {
    const double t = now_();
    tokens_ = std::min(capacity_, tokens_ + (t - last_) * rate_per_s_);
    last_ = t;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rate_per_s_;
    lock.unlock();
    sleep_(wait);
    lock.lock();
  }
}

InflightLimiter::InflightLimiter(int max_inflight) : max_(std::max(1, max_inflight)) {}

void InflightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return active_ < max_; });
  ++active_;
}

void InflightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --active_;
  }
  cv_.notify_one();
}

// --- gateway ---------------------------------------------------------------

struct Gateway::EndpointState {
  EndpointConfig config;
  InflightLimiter inflight;
  std::unique_ptr<TokenBucket> bucket;

  explicit EndpointState(EndpointConfig c)
      : config(std::move(c)), inflight(config.max_parallel) {}
};

namespace {

double steady_now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void real_sleep_s(double s) {
  std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

std::optional<std::string> real_getenv(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

bool is_transient(const HttpResponse& r) {
  return r.timed_out || r.status == 0 || r.status == 429 || r.status >= 500;
}

}  // namespace

Gateway::Gateway(std::vector<EndpointConfig> endpoints,
                 std::shared_ptr<Transport> transport, GatewayOptions options)
    : transport_(std::move(transport)), options_(std::move(options)),
      rng_(options_.jitter_seed) {
  if (!options_.getenv) options_.getenv = real_getenv;
  if (!options_.sleep) options_.sleep = real_sleep_s;
  if (!options_.now) options_.now = steady_now_s;
  if (options_.cache_dir) cache_ = std::make_unique<ResponseCache>(*options_.cache_dir);
  for (auto& e : endpoints) {
    auto state = std::make_unique<EndpointState>(e);
    if (e.rpm_limit > 0) {
      state->bucket = std::make_unique<TokenBucket>(e.rpm_limit, options_.now,
                                                    options_.sleep);
    }
    endpoints_.emplace(e.id, std::move(state));
  }
}

Gateway::~Gateway() = default;

bool Gateway::has_endpoint(const std::string& id) const {
  return endpoints_.count(id) > 0;
}

GatewayStats Gateway::stats() const {
  return {calls_.load(), cache_hits_.load(), http_attempts_.load(), retries_.load()};
}

double Gateway::backoff_delay(int attempt) {
  const double base = std::min(options_.backoff_max_s,
                               options_.backoff_base_s * std::pow(2.0, attempt - 1));
  std::lock_guard lock(rng_mu_);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  return base * (0.5 + 0.5 * u);
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  req.validate();
  ++calls_;
  auto it = endpoints_.find(req.endpoint_id);
  if (it == endpoints_.end()) {
    throw Error(ErrorCode::kConfigError, "unknown endpoint '" + req.endpoint_id + "'");
  }
  const std::string key = cache_key(req);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      return *hit;
    }
  }
  if (options_.offline) {
    throw Error(ErrorCode::kCacheMiss, "no cached response for " + key);
  }
  EndpointState& ep = *it->second;
  std::string api_key;
  if (ep.config.requires_key) {
    const auto var = credential_env_var(ep.config.id);
    auto value = options_.getenv(var);
    if (!value) {
      throw ProviderFailure(ErrorCode::kAuthError, 0, "environment variable " + var + " is not set");
    }
    api_key = *value;
  }
  ChatResponse resp = call_with_retries(ep, req, api_key);
  if (cache_) cache_->put(key, req, resp);
  return resp;
}

ChatResponse Gateway::call_with_retries(EndpointState& ep, const ChatRequest& req,
                                        const std::string& api_key) {
  const HttpRequest http = build_http_request(ep.config, req, api_key);
  const int cap = std::max(1, ep.config.retry_cap);
  HttpResponse last;
  for (int attempt = 1; attempt <= cap; ++attempt) {
    if (ep.bucket) ep.bucket->acquire();
    ep.inflight.acquire();
    const double start = options_.now();
    try {
      ++http_attempts_;
      last = transport_->post(http);
    } catch (...) {
      ep.inflight.release();
      throw;
    }
    ep.inflight.release();
    const auto latency_ms =
        static_cast<std::int64_t>(std::llround((options_.now() - start) * 1000.0));

    if (last.status >= 200 && last.status < 300) {
      ChatResponse resp = parse_http_response(ep.config.dialect, last.body);
      resp.latency_ms = latency_ms;
      if (attempt > 1) {
        spdlog::info("{} / {}: succeeded after {} attempts", ep.config.id, req.model_id, attempt);
      }
      return resp;
    }
    if (last.status == 401 || last.status == 403) {
      throw ProviderFailure(ErrorCode::kAuthError, last.status,
                            ep.config.id + " rejected the credentials");
    }
    if (!is_transient(last)) {
      throw ProviderFailure(ErrorCode::kProviderError, last.status,
                            ep.config.id + " returned HTTP " + std::to_string(last.status) +
                                ": " + last.body.substr(0, 200));
    }
    if (attempt < cap) {
      ++retries_;
      const double delay = backoff_delay(attempt);
      spdlog::warn("{}: attempt {}/{} failed ({}), retrying in {:.2f}s", ep.config.id,
                   attempt, cap,
                   last.timed_out ? std::string("timeout")
                                  : last.status == 0 ? last.transport_error
                                                     : "HTTP " + std::to_string(last.status),
                   delay);
      options_.sleep(delay);
    }
  }
  if (last.timed_out) {
    throw ProviderFailure(ErrorCode::kTimeout, 0, ep.config.id + " timed out");
  }
  if (last.status == 429) {
    throw ProviderFailure(ErrorCode::kRateLimited, 429,
                          ep.config.id + " still rate limited after " + std::to_string(cap) +
                              " attempts");
  }
  throw ProviderFailure(ErrorCode::kProviderError, last.status,
                        ep.config.id + " failed after " + std::to_string(cap) +
                            " attempts: " +
                            (last.status == 0 ? last.transport_error
                                              : "HTTP " + std::to_string(last.status)));
}

}  // namespace revfocus
