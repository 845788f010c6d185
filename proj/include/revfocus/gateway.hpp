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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "revfocus/error.hpp"
#include "revfocus/serialize.hpp"

namespace revfocus {

enum class Role : std::uint8_t { kSystem, kUser, kAssistant };

std::string_view to_string(Role r);
Role role_from_id(std::string_view id);

struct ChatMessage {
  Role role = Role::kUser;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

enum class ResponseHint : std::uint8_t { kFreeText, kStructured };

struct ChatRequest {
  std::string endpoint_id;
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 2048;
  ResponseHint response_hint = ResponseHint::kFreeText;

  // Throws kInvalidArgument on an empty message list, a non-finite or
  // negative temperature, or a non-positive token budget.
  void validate() const;

  bool operator==(const ChatRequest&) const = default;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  bool operator==(const Usage&) const = default;
};

struct ChatResponse {
  std::string text;
  Usage usage;
  bool cached = false;
  std::int64_t latency_ms = 0;
};

/// Canonical serialization of the fields that identify a request. JSON objects
/// are key-sorted, so the result does not depend on construction order.
std::string canonical_request(const ChatRequest& req);

/// sha256 hex of canonical_request().
std::string cache_key(const ChatRequest& req);

/// Anything that can answer a chat request. Stages depend on this, so tests
/// can script answers without the HTTP stack.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

/// Positionally aligned results; at most `parallelism` requests in flight.
std::vector<Result<ChatResponse>> complete_batch(
    ChatClient& client, const std::vector<ChatRequest>& reqs,
    std::size_t parallelism);

// --- wire layer ------------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_s = 120.0;
};

struct HttpResponse {
  int status = 0;  // 0 when no response arrived
  std::string body;
  bool timed_out = false;
  std::string transport_error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& req) = 0;
};

/// HTTPS transport backed by cpp-httplib.
class HttplibTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& req) override;
};

enum class Dialect : std::uint8_t { kOpenAI, kAnthropic };

Dialect dialect_from_id(std::string_view id);

struct EndpointConfig {
  std::string id;
  std::string base_url;
  Dialect dialect = Dialect::kOpenAI;
  int rpm_limit = 0;  // 0: no ceiling
  int max_parallel = 4;
  int retry_cap = 5;  // total attempts per request
  double timeout_s = 120.0;
  bool requires_key = true;
  // OpenAI reasoning models want max_completion_tokens and no temperature.
  std::string max_tokens_field = "max_tokens";
  bool send_temperature = true;
};

/// <ENDPOINT_ID>_API_KEY with the id uppercased and non-alphanumerics as '_'.
std::string credential_env_var(std::string_view endpoint_id);

HttpRequest build_http_request(const EndpointConfig& endpoint,
                               const ChatRequest& req,
                               const std::string& api_key);

/// Extracts text and usage from a provider reply. Throws kProviderError.
ChatResponse parse_http_response(Dialect dialect, const std::string& body);

// --- cache -----------------------------------------------------------------

/// One JSON file per entry at <dir>/<first 2 hex of key>/<key>.json.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<ChatResponse> get(const std::string& key) const;
  void put(const std::string& key, const ChatRequest& req,
           const ChatResponse& resp);
  std::size_t size() const;
  std::filesystem::path entry_path(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  void rebuild_index();

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::set<std::string> index_;
};

// --- flow control ----------------------------------------------------------

/// Shared token bucket enforcing a requests-per-minute ceiling.
class TokenBucket {
 public:
  using NowFn = std::function<double()>;          // seconds, monotonic
  using SleepFn = std::function<void(double)>;    // seconds

  TokenBucket(double rpm, NowFn now, SleepFn sleep);
  void acquire();

 private:
  double rate_per_s_;
  double capacity_;
  double tokens_;
  double last_;
  NowFn now_;
  SleepFn sleep_;
  std::mutex mu_;
};

/// Bounds concurrent in-flight calls per endpoint.
class InflightLimiter {
 public:
  explicit InflightLimiter(int max_inflight);
  void acquire();
  void release();

 private:
  int max_;
  int active_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  // Cache-only replay: a miss raises kCacheMiss instead of calling out.
  bool offline = false;
  double backoff_base_s = 0.5;
  double backoff_max_s = 30.0;
  std::uint64_t jitter_seed = 0x5eed;
  std::function<std::optional<std::string>(const std::string&)> getenv;
  std::function<void(double)> sleep;
  std::function<double()> now;
};

struct GatewayStats {
  std::size_t calls = 0;
  std::size_t cache_hits = 0;
  std::size_t http_attempts = 0;
  std::size_t retries = 0;
};

/// Provider-agnostic client: cache, retries with backoff and jitter, per
/// endpoint in-flight bound and rpm ceiling. Safe to call from many threads.
class Gateway : public ChatClient {
 public:
  Gateway(std::vector<EndpointConfig> endpoints,
          std::shared_ptr<Transport> transport, GatewayOptions options = {});
  ~Gateway() override;

  ChatResponse complete(const ChatRequest& req) override;

  GatewayStats stats() const;
  bool has_endpoint(const std::string& id) const;

 private:
  struct EndpointState;

  ChatResponse call_with_retries(EndpointState& ep, const ChatRequest& req,
                                 const std::string& api_key);
  double backoff_delay(int attempt);

  std::map<std::string, std::unique_ptr<EndpointState>> endpoints_;
  std::shared_ptr<Transport> transport_;
  GatewayOptions options_;
  std::unique_ptr<ResponseCache> cache_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> http_attempts_{0};
  std::atomic<std::size_t> retries_{0};
};

}  // namespace revfocus
