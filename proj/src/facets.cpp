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

#include "revfocus/facets.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "revfocus/error.hpp"

namespace revfocus {

// Defined in the generated builtin_synonyms.cpp (contents of
// data/facet_synonyms.json at configure time).
extern const char* const kBuiltinSynonymJson;

namespace {

constexpr std::array<std::string_view, 7> kTargetIds = {
    "problem",    "prior_research", "method", "theory",
    "experiment", "conclusion",     "paper"};
constexpr std::array<std::string_view, 7> kTargetNames = {
    "Problem",    "Prior Research", "Method", "Theory",
    "Experiment", "Conclusion",     "Paper"};
constexpr std::array<std::string_view, 5> kAspectIds = {
    "impact", "novelty", "clarity", "validity", "not_specific"};
constexpr std::array<std::string_view, 5> kAspectNames = {
    "Impact", "Novelty", "Clarity", "Validity", "Not-specific"};

template <typename Enum, std::size_t N>
Enum lookup_id(const std::array<std::string_view, N>& ids, std::string_view id,
               std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (ids[i] == id) return static_cast<Enum>(i);
  }
  throw Error(ErrorCode::kUnknownLabel,
              std::string(what) + " '" + std::string(id) + "'");
}

}  // namespace

std::string_view to_string(TargetFacet f) {
  return kTargetIds.at(static_cast<std::size_t>(f));
}
std::string_view to_string(AspectFacet f) {
  return kAspectIds.at(static_cast<std::size_t>(f));
}
std::string_view to_string(Polarity p) {
  return p == Polarity::kStrength ? "strength" : "weakness";
}
std::string_view to_string(FacetKind k) {
  return k == FacetKind::kTarget ? "target" : "aspect";
}

std::string_view display_name(TargetFacet f) {
  return kTargetNames.at(static_cast<std::size_t>(f));
}
std::string_view display_name(AspectFacet f) {
  return kAspectNames.at(static_cast<std::size_t>(f));
}

TargetFacet target_from_id(std::string_view id) {
  return lookup_id<TargetFacet>(kTargetIds, id, "target");
}
AspectFacet aspect_from_id(std::string_view id) {
  return lookup_id<AspectFacet>(kAspectIds, id, "aspect");
}
Polarity polarity_from_id(std::string_view id) {
  if (id == "strength") return Polarity::kStrength;
  if (id == "weakness") return Polarity::kWeakness;
  throw Error(ErrorCode::kUnknownLabel, "polarity '" + std::string(id) + "'");
}
FacetKind facet_kind_from_id(std::string_view id) {
  if (id == "target") return FacetKind::kTarget;
  if (id == "aspect") return FacetKind::kAspect;
  throw Error(ErrorCode::kUnknownLabel, "facet kind '" + std::string(id) + "'");
}

std::size_t facet_index(const Facet& f) {
  return std::visit([](auto v) { return static_cast<std::size_t>(v); }, f);
}

std::string_view facet_id(const Facet& f) {
  return std::visit([](auto v) { return to_string(v); }, f);
}

Facet facet_at(FacetKind kind, std::size_t index) {
  if (kind == FacetKind::kTarget) return kAllTargets.at(index);
  return kAllAspects.at(index);
}

std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c) || c == '_' || c == '-' || c == '/') {
      pending_space = !out.empty();
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                           : static_cast<char>(c));
  }
  return out;
}

const SynonymTable& SynonymTable::builtin() {
  static const SynonymTable table = from_json_text(kBuiltinSynonymJson);
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot read synonym table " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

SynonymTable SynonymTable::from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                std::string("synonym table: ") + e.what());
  }
  SynonymTable table;
  table.version_ = doc.value("version", "");
  if (table.version_.empty()) {
    throw Error(ErrorCode::kConfigError, "synonym table has no version");
  }
  // Canonical ids and display names always resolve, whatever the file says.
  for (auto f : kAllTargets) {
    table.targets_[normalize_label(to_string(f))] = f;
    table.targets_[normalize_label(display_name(f))] = f;
  }
  for (auto f : kAllAspects) {
    table.aspects_[normalize_label(to_string(f))] = f;
    table.aspects_[normalize_label(display_name(f))] = f;
  }
  try {
    const auto targets = doc.value("target", nlohmann::json::object());
    const auto aspects = doc.value("aspect", nlohmann::json::object());
    for (const auto& [id, words] : targets.items()) {
      const TargetFacet f = target_from_id(id);
      for (const auto& w : words) table.targets_[normalize_label(w.get<std::string>())] = f;
    }
    for (const auto& [id, words] : aspects.items()) {
      const AspectFacet f = aspect_from_id(id);
      for (const auto& w : words) table.aspects_[normalize_label(w.get<std::string>())] = f;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("synonym table: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, std::string("synonym table: ") + e.what());
  }
  return table;
}

const TargetFacet* SynonymTable::find_target(const std::string& key) const {
  auto it = targets_.find(key);
  return it == targets_.end() ? nullptr : &it->second;
}

const AspectFacet* SynonymTable::find_aspect(const std::string& key) const {
  auto it = aspects_.find(key);
  return it == aspects_.end() ? nullptr : &it->second;
}

Facet parse_facet(FacetKind kind, std::string_view raw,
                  const SynonymTable& table) {
  std::string key = normalize_label(raw);
  // Tolerate a "Target: Method" / "Aspect - Validity" style prefix.
  for (std::string_view prefix : {"target ", "aspect ", "label "}) {
    if (key.rfind(prefix, 0) == 0) {
      key.erase(0, prefix.size());
      break;
    }
  }
  if (kind == FacetKind::kTarget) {
    if (const auto* f = table.find_target(key)) return *f;
  } else {
    if (const auto* f = table.find_aspect(key)) return *f;
  }
  throw Error(ErrorCode::kUnknownLabel,
              std::string(to_string(kind)) + " '" + std::string(raw) + "'");
}

}  // namespace revfocus
