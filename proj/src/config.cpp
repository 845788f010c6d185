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

#include "revfocus/config.hpp"

#include <charconv>
#include <sstream>

#include "revfocus/stage_io.hpp"

namespace revfocus {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw Error(ErrorCode::kConfigError, key + " = '" + value + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "not a number");
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "not an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "not a boolean");
}

// Runs a *_from_id parser and reports failures as configuration errors.
template <typename Fn>
auto enum_value(const std::string& key, const std::string& v, Fn&& fn) {
  try {
    return fn(v);
  } catch (const Error& e) {
    bad_value(key, v, e.what());
  }
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text,
                                                    const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  origin + " line " + std::to_string(no) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kConfigError, origin + " line " + std::to_string(no) + ": empty key");
    }
    out[std::move(key)] = trim(t.substr(eq + 1));
  }
  return out;
}

std::string_view to_string(TextCandidate c) {
  return c == TextCandidate::kRawText ? "raw_text" : "parsed_points";
}

TextCandidate text_candidate_from_id(std::string_view id) {
  if (id == "raw_text") return TextCandidate::kRawText;
  if (id == "parsed_points") return TextCandidate::kParsedPoints;
  throw Error(ErrorCode::kInvalidArgument, "unknown text candidate '" + std::string(id) + "'");
}

RunConfig RunConfig::from_key_values(const std::map<std::string, std::string>& kv,
                                     const std::filesystem::path& base_dir) {
  RunConfig c;
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };
  c.run_dir = path("run");
  c.prompts_dir = path("prompts");

  for (const auto& [key, v] : kv) {
    const auto dot = key.find('.');
    const std::string head = key.substr(0, dot);
    if (key == "run_dir") {
      c.run_dir = path(v);
    } else if (key == "corpus.exports") {
      c.exports.clear();
      for (const auto& p : split_list(v)) c.exports.push_back(path(p));
    } else if (key == "corpus.schema") {
      c.schema = enum_value(key, v, export_schema_from_id);
    } else if (key == "corpus.key_map") {
      c.key_map = path(v);
    } else if (key == "corpus.strict") {
      c.strict = to_bool(key, v);
    } else if (key == "corpus.year_min") {
      c.year_min = to_int<int>(key, v);
    } else if (key == "corpus.year_max") {
      c.year_max = to_int<int>(key, v);
    } else if (key == "corpus.decisions") {
      c.decisions.clear();
      for (const auto& d : split_list(v)) c.decisions.insert(enum_value(key, d, decision_from_id));
    } else if (key == "corpus.sample_fraction") {
      c.sample_fraction = to_double(key, v);
    } else if (key == "corpus.sample_seed") {
      c.sample_seed = to_int<std::uint64_t>(key, v);
    } else if (key == "prompts.dir") {
      c.prompts_dir = path(v);
    } else if (key == "cache.dir") {
      c.cache_dir = path(v);
    } else if (key == "cache.offline") {
      c.offline = to_bool(key, v);
    } else if (head == "endpoint" && dot != std::string::npos) {
      const auto last = key.rfind('.');
      if (last == dot) bad_value(key, v, "expected endpoint.<id>.<field>");
      const std::string id = key.substr(dot + 1, last - dot - 1);
      const std::string field = key.substr(last + 1);
      auto& e = c.endpoints[id];
      e.id = id;
      if (field == "base_url") e.base_url = v;
      else if (field == "dialect") e.dialect = enum_value(key, v, dialect_from_id);
      else if (field == "rpm") e.rpm_limit = to_int<int>(key, v);
      else if (field == "max_parallel") e.max_parallel = to_int<int>(key, v);
      else if (field == "retry_cap") e.retry_cap = to_int<int>(key, v);
      else if (field == "timeout_s") e.timeout_s = to_double(key, v);
      else if (field == "requires_key") e.requires_key = to_bool(key, v);
      else if (field == "max_tokens_field") e.max_tokens_field = v;
      else if (field == "send_temperature") e.send_temperature = to_bool(key, v);
      else bad_value(key, v, "unknown endpoint field");
    } else if (head == "model" && dot != std::string::npos) {
      const auto last = key.rfind('.');
      if (last == dot) bad_value(key, v, "expected model.<id>.<field>");
      const std::string id = key.substr(dot + 1, last - dot - 1);
      const std::string field = key.substr(last + 1);
      auto& m = c.models[id];
      m.id = id;
      if (field == "endpoint") m.endpoint_id = v;
      else if (field == "provider_model") m.provider_model = v;
      else bad_value(key, v, "unknown model field");
    } else if (key == "generation.models") {
      c.review_models = split_list(v);
    } else if (key == "generation.temperature") {
      c.generation_temperature = to_double(key, v);
    } else if (key == "generation.max_paper_tokens") {
      c.max_paper_tokens = to_int<std::size_t>(key, v);
    } else if (key == "generation.max_output_tokens") {
      c.max_output_tokens = to_int<int>(key, v);
    } else if (key == "expert.model") {
      c.expert_model = v;
    } else if (key == "expert.temperature") {
      c.expert_temperature = to_double(key, v);
    } else if (key == "annotator.model") {
      c.annotator_model = v;
    } else if (key == "annotator.temperature") {
      c.annotation_temperature = to_double(key, v);
    } else if (key == "parallelism") {
      c.parallelism = to_int<std::size_t>(key, v);
    } else if (key == "irr.gold") {
      c.gold_labels = path(v);
    } else if (key == "irr.kappa_floor") {
      c.kappa_floor = to_double(key, v);
    } else if (key == "metrics.epsilon") {
      c.epsilon = to_double(key, v);
    } else if (key == "metrics.kl_direction") {
      c.kl_direction = enum_value(key, v, kl_direction_from_id);
    } else if (key == "metrics.match_mode") {
      c.match_mode = enum_value(key, v, match_mode_from_id);
    } else if (key == "metrics.label_match") {
      c.label_match = enum_value(key, v, label_match_from_id);
    } else if (key == "metrics.text_candidate") {
      c.text_candidate = enum_value(key, v, text_candidate_from_id);
    } else if (key == "loss_threshold") {
      c.loss_threshold = to_double(key, v);
    } else {
      throw Error(ErrorCode::kConfigError, "unknown key '" + key + "'");
    }
  }
  for (auto& [id, m] : c.models) {
    if (m.provider_model.empty()) m.provider_model = id;
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path,
                          const std::map<std::string, std::string>& overrides) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  auto kv = parse_key_values(text, path.string());
  for (const auto& [k, v] : overrides) kv[k] = v;
  auto c = from_key_values(kv, path.parent_path().empty() ? "." : path.parent_path());
  c.validate();
  return c;
}

void RunConfig::validate() const {
  for (const auto& [id, e] : endpoints) {
    if (e.base_url.empty()) {
      throw Error(ErrorCode::kConfigError, "endpoint '" + id + "' has no base_url");
    }
    if (e.max_parallel < 1 || e.retry_cap < 1 || e.rpm_limit < 0 || !(e.timeout_s > 0)) {
      throw Error(ErrorCode::kConfigError, "endpoint '" + id + "' has out-of-range limits");
    }
  }
  for (const auto& [id, m] : models) {
    if (id == "human") throw Error(ErrorCode::kConfigError, "model id 'human' is reserved");
    if (!endpoints.count(m.endpoint_id)) {
      throw Error(ErrorCode::kConfigError,
                  "model '" + id + "' maps to unknown endpoint '" + m.endpoint_id + "'");
    }
  }
  auto known = [&](const std::string& id, const std::string& role) {
    if (!models.count(id)) {
      throw Error(ErrorCode::kConfigError, role + " model '" + id + "' is not configured");
    }
  };
  for (const auto& m : review_models) known(m, "generation");
  if (expert_model) known(*expert_model, "expert");
  if (annotator_model) known(*annotator_model, "annotator");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
    throw Error(ErrorCode::kConfigError, "corpus.sample_fraction must be in (0, 1]");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kConfigError, "metrics.epsilon must be > 0");
  if (parallelism == 0) throw Error(ErrorCode::kConfigError, "parallelism must be >= 1");
  if (!(loss_threshold >= 0.0 && loss_threshold <= 1.0)) {
    throw Error(ErrorCode::kConfigError, "loss_threshold must be in [0, 1]");
  }
  for (const double t : {expert_temperature, generation_temperature, annotation_temperature}) {
    if (!(t >= 0.0)) throw Error(ErrorCode::kConfigError, "temperatures must be >= 0");
  }
}

void RunConfig::require_path(const std::filesystem::path& p, const std::string& what) const {
  if (!std::filesystem::exists(p)) {
    throw Error(ErrorCode::kConfigError, what + " not found: " + p.string());
  }
}

StageModel RunConfig::stage_model(const std::string& model, double temperature) const {
  auto it = models.find(model);
  if (it == models.end()) {
    throw Error(ErrorCode::kConfigError, "model '" + model + "' is not configured");
  }
  if (!endpoints.count(it->second.endpoint_id)) {
    throw Error(ErrorCode::kConfigError, "model '" + model + "' maps to unknown endpoint '" +
                                             it->second.endpoint_id + "'");
  }
  return {it->second.endpoint_id, it->second.provider_model, temperature, max_output_tokens, model};
}

std::vector<EndpointConfig> RunConfig::endpoint_list() const {
  std::vector<EndpointConfig> out;
  for (const auto& [id, e] : endpoints) out.push_back(e);
  return out;
}

}  // namespace revfocus
