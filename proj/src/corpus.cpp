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

#include "revfocus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <regex>

#include <spdlog/spdlog.h>

#include "revfocus/error.hpp"

namespace revfocus {

namespace {

// Follows a dotted path; unwraps OpenReview v2 {"value": ...} wrappers.
const json* find_path(const json& root, std::string_view path) {
  const json* cur = &root;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    auto dot = path.find('.', pos);
    if (dot == std::string_view::npos) dot = path.size();
    const std::string key(path.substr(pos, dot - pos));
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (cur->is_object() && cur->size() == 1 && cur->contains("value")) {
      cur = &(*cur)["value"];
    }
    pos = dot + 1;
  }
  return cur;
}

std::optional<std::string> text_at(const json& root, std::string_view path) {
  const json* v = find_path(root, path);
  if (v == nullptr || v->is_null()) return std::nullopt;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number_integer()) return std::to_string(v->get<long long>());
  return std::nullopt;
}

std::string joined_text(const json& root, const std::vector<std::string>& paths) {
  std::string out;
  for (const auto& p : paths) {
    auto t = text_at(root, p);
    if (!t || t->empty()) continue;
    if (!out.empty()) out += "\n\n";
    out += *t;
  }
  return out;
}

std::optional<int> year_of(const json& root, std::string_view field) {
  const json* v = find_path(root, field);
  if (v == nullptr) return std::nullopt;
  if (v->is_number_integer()) return v->get<int>();
  if (v->is_string()) {
    static const std::regex kYear(R"((19|20)\d\d)");
    std::smatch m;
    const auto s = v->get<std::string>();
    if (std::regex_search(s, m, kYear)) return std::stoi(m.str());
  }
  return std::nullopt;
}

ExportFields fields_from_json(const json& j, ExportFields base) {
  auto list = [&](const char* key, std::vector<std::string>& dst) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    dst = v.is_string() ? std::vector<std::string>{v.get<std::string>()}
                        : v.get<std::vector<std::string>>();
  };
  base.paper_id = j.value("paper_id", base.paper_id);
  base.title = j.value("title", base.title);
  base.decision = j.value("decision", base.decision);
  list("meta_review", base.meta_review);
  base.reviews = j.value("reviews", base.reviews);
  base.reviewer_id = j.value("reviewer_id", base.reviewer_id);
  list("review_text", base.review_text);
  base.body_text = j.value("body_text", base.body_text);
  return base;
}

struct Parsed {
  PaperRecord paper;
  ReviewBundle bundle;
};

Parsed parse_openreview(const json& rec, const ExportKeyMap& keys) {
  const auto year = year_of(rec, keys.year_field());
  const ExportFields& f = keys.fields_for(year);
  Parsed out;
  auto id = text_at(rec, f.paper_id);
  if (!id || id->empty()) {
    throw Error(ErrorCode::kMalformedRecord, "no submission id");
  }
  out.paper.paper_id = *id;
  out.paper.title = text_at(rec, f.title).value_or("");
  out.paper.venue_year = year.value_or(0);
  const auto decision_text = text_at(rec, f.decision).value_or("");
  out.paper.decision = normalize_decision(decision_text);
  out.paper.body_text = text_at(rec, f.body_text).value_or("");
  out.paper.source_meta["decision_text"] = decision_text;
  out.paper.source_meta["schema"] = "openreview_v1";

  out.bundle.paper_id = *id;
  out.bundle.meta_review = joined_text(rec, f.meta_review);
  if (const json* reviews = find_path(rec, f.reviews);
      reviews != nullptr && reviews->is_array()) {
    std::size_t n = 0;
    for (const auto& r : *reviews) {
      ++n;
      std::string text = joined_text(r, f.review_text);
      if (text.empty()) continue;
      auto reviewer = text_at(r, f.reviewer_id).value_or("reviewer_" + std::to_string(n));
      out.bundle.individual_reviews.push_back({std::move(reviewer), std::move(text)});
    }
  }
  return out;
}

Parsed parse_generic(const json& rec) {
  Parsed out;
  if (!rec.contains("paper_id") || !rec["paper_id"].is_string() ||
      rec["paper_id"].get<std::string>().empty()) {
    throw Error(ErrorCode::kMalformedRecord, "no paper_id");
  }
  out.paper.paper_id = rec["paper_id"].get<std::string>();
  out.paper.title = rec.value("title", "");
  out.paper.venue_year = rec.value("venue_year", 0);
  const auto decision_text = rec.value("decision", "");
  out.paper.decision = normalize_decision(decision_text);
  out.paper.body_text = rec.value("body_text", "");
  out.paper.source_meta = rec.value("source_meta", std::map<std::string, std::string>{});
  out.paper.source_meta["decision_text"] = decision_text;
  out.paper.source_meta["schema"] = "generic";

  out.bundle.paper_id = out.paper.paper_id;
  out.bundle.meta_review = rec.value("meta_review", "");
  for (const auto& r : rec.value("individual_reviews", json::array())) {
    out.bundle.individual_reviews.push_back(
        {r.value("reviewer_id", ""), r.value("text", "")});
  }
  return out;
}

// Unbiased draw in [0, bound) by rejection.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

ExportSchema export_schema_from_id(std::string_view id) {
  if (id == "openreview_v1") return ExportSchema::kOpenReviewV1;
  if (id == "generic") return ExportSchema::kGeneric;
  throw Error(ErrorCode::kConfigError, "unknown schema hint '" + std::string(id) + "'");
}

ExportKeyMap ExportKeyMap::from_json(const json& doc) {
  ExportKeyMap m;
  m.year_field_ = doc.value("year_field", m.year_field_);
  if (doc.contains("default")) m.defaults_ = fields_from_json(doc["default"], {});
  const auto years = doc.value("years", json::object());
  for (const auto& [year, fields] : years.items()) {
    m.per_year_[std::stoi(year)] = fields_from_json(fields, m.defaults_);
  }
  return m;
}

ExportKeyMap ExportKeyMap::load(const std::filesystem::path& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kConfigError, "key map is not JSON: " + path.string());
  }
  return from_json(doc);
}

const ExportFields& ExportKeyMap::fields_for(std::optional<int> year) const {
  if (year) {
    auto it = per_year_.find(*year);
    if (it != per_year_.end()) return it->second;
  }
  return defaults_;
}

Decision normalize_decision(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower.find("reject") != std::string::npos) return Decision::kRejected;
  if (lower.find("accept") != std::string::npos) return Decision::kAccepted;
  return Decision::kUnknown;
}

LoadResult load_export_text(std::string_view text, const LoadOptions& options) {
  if (options.schema == ExportSchema::kOpenReviewV1 && options.key_map == nullptr) {
    throw Error(ErrorCode::kConfigError, "openreview_v1 needs a key map");
  }
  LoadResult result;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      json rec = json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.is_object()) {
        throw Error(ErrorCode::kMalformedRecord, "not a JSON object");
      }
      Parsed p = options.schema == ExportSchema::kOpenReviewV1
                     ? parse_openreview(rec, *options.key_map)
                     : parse_generic(rec);
      std::set<std::string> reviewers;
      for (auto& r : p.bundle.individual_reviews) {
        if (r.reviewer_id.empty()) r.reviewer_id = "reviewer_" + std::to_string(reviewers.size() + 1);
        if (!reviewers.insert(r.reviewer_id).second) {
          throw Error(ErrorCode::kMalformedRecord, "duplicate reviewer " + r.reviewer_id);
        }
      }
      if (!seen.insert(p.paper.paper_id).second) {
        throw Error(ErrorCode::kMalformedRecord,
                    "duplicate paper_id " + p.paper.paper_id);
      }
      if (p.bundle.meta_review.empty()) {
        result.missing_meta_review.push_back(p.paper.paper_id);
      }
      result.papers.push_back(std::move(p.paper));
      result.bundles.push_back(std::move(p.bundle));
    } catch (const Error& e) {
      if (options.strict) {
        throw Error(ErrorCode::kMalformedRecord,
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
      result.malformed_lines.push_back(line_no);
    } catch (const json::exception& e) {
      if (options.strict) {
        throw Error(ErrorCode::kMalformedRecord,
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
      result.malformed_lines.push_back(line_no);
    }
  }
  if (!result.malformed_lines.empty()) {
    spdlog::warn("skipped {} malformed export line(s)", result.malformed_lines.size());
  }
  if (!result.missing_meta_review.empty()) {
    spdlog::warn("{} submission(s) have no meta-review; excluded from expert extraction",
                 result.missing_meta_review.size());
  }
  return result;
}

LoadResult load_export(const std::filesystem::path& path,
                       const LoadOptions& options) {
  return load_export_text(read_file(path), options);
}

std::vector<PaperRecord> filter_decision(const std::vector<PaperRecord>& papers,
                                         const std::set<Decision>& keep) {
  std::vector<PaperRecord> out;
  std::copy_if(papers.begin(), papers.end(), std::back_inserter(out),
               [&](const PaperRecord& p) { return keep.count(p.decision) > 0; });
  return out;
}

std::vector<PaperRecord> filter_years(const std::vector<PaperRecord>& papers,
                                      std::optional<int> min_year,
                                      std::optional<int> max_year) {
  std::vector<PaperRecord> out;
  std::copy_if(papers.begin(), papers.end(), std::back_inserter(out),
               [&](const PaperRecord& p) {
                 return (!min_year || p.venue_year >= *min_year) &&
                        (!max_year || p.venue_year <= *max_year);
               });
  return out;
}

std::size_t sample_size(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidFraction,
                "sample fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  const long double exact = static_cast<long double>(fraction) * n;
  return static_cast<std::size_t>(std::floor(exact + 0.5L));
}

std::vector<PaperRecord> sample(const std::vector<PaperRecord>& papers,
                                double fraction, std::uint64_t seed) {
  const std::size_t k = sample_size(papers.size(), fraction);
  std::vector<std::size_t> order(papers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[bounded(rng, i)]);
  }
  std::vector<PaperRecord> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(papers[order[i]]);
  std::sort(out.begin(), out.end(), [](const PaperRecord& a, const PaperRecord& b) {
    return a.paper_id < b.paper_id;
  });
  return out;
}

void to_json(json& j, const StageEntry& e) {
  j = json{{"path", e.path}, {"count", e.count}, {"sha256", e.sha256}};
}

void from_json(const json& j, StageEntry& e) {
  e.path = j.value("path", "");
  e.count = j.value("count", std::size_t{0});
  e.sha256 = j.value("sha256", "");
}

void to_json(json& j, const CorpusManifest& m) {
  json filter = json::array();
  for (auto d : m.decision_filter) filter.push_back(d);
  j = json{{"schema_version", kSchemaVersion},
           {"source_paths", m.source_paths},
           {"year_min", m.year_min ? json(*m.year_min) : json(nullptr)},
           {"year_max", m.year_max ? json(*m.year_max) : json(nullptr)},
           {"decision_filter", std::move(filter)},
           {"sample_fraction", m.sample_fraction},
           {"sample_seed", m.sample_seed},
           {"stages", m.stages},
           {"runs", m.runs}};
}

void from_json(const json& j, CorpusManifest& m) {
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw Error(ErrorCode::kVersionMismatch, "manifest schema_version");
  }
  m.source_paths = j.value("source_paths", std::vector<std::string>{});
  m.year_min = j.contains("year_min") && j["year_min"].is_number()
                   ? std::optional<int>(j["year_min"].get<int>())
                   : std::nullopt;
  m.year_max = j.contains("year_max") && j["year_max"].is_number()
                   ? std::optional<int>(j["year_max"].get<int>())
                   : std::nullopt;
  m.decision_filter.clear();
  for (const auto& d : j.value("decision_filter", json::array())) {
    m.decision_filter.push_back(d.get<Decision>());
  }
  m.sample_fraction = j.value("sample_fraction", 1.0);
  m.sample_seed = j.value("sample_seed", std::uint64_t{0});
  m.stages = j.value("stages", std::map<std::string, StageEntry>{});
  m.runs = j.value("runs", json::object());
}

CorpusManifest CorpusManifest::load(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kMalformedRecord, "manifest is not JSON: " + path.string());
  }
  return j.get<CorpusManifest>();
}

void CorpusManifest::save(const std::filesystem::path& path) const {
  write_file_atomic(path, json(*this).dump(2) + "\n");
}

}  // namespace revfocus
