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

#include <nlohmann/json.hpp>

#include "revfocus/types.hpp"

// nlohmann ADL hooks for every record that appears in a stage file.
namespace revfocus {

using json = nlohmann::json;

void to_json(json& j, TargetFacet f);
void from_json(const json& j, TargetFacet& f);
void to_json(json& j, AspectFacet f);
void from_json(const json& j, AspectFacet& f);
void to_json(json& j, Polarity p);
void from_json(const json& j, Polarity& p);
void to_json(json& j, FacetKind k);
void from_json(const json& j, FacetKind& k);
void to_json(json& j, Decision d);
void from_json(const json& j, Decision& d);

void to_json(json& j, const PaperRecord& r);
void from_json(const json& j, PaperRecord& r);
void to_json(json& j, const ReviewBundle& b);
void from_json(const json& j, ReviewBundle& b);
void to_json(json& j, const ReviewPoint& p);
void from_json(const json& j, ReviewPoint& p);
void to_json(json& j, const AnnotatedPoint& a);
void from_json(const json& j, AnnotatedPoint& a);
void to_json(json& j, const FocusDistribution& d);
void from_json(const json& j, FocusDistribution& d);
void to_json(json& j, const FocusProfile& p);
void from_json(const json& j, FocusProfile& p);
void to_json(json& j, const DraftPoint& d);
void from_json(const json& j, DraftPoint& d);
void to_json(json& j, const GeneratedReview& g);
void from_json(const json& j, GeneratedReview& g);

}  // namespace revfocus
