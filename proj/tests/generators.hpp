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

// Hand-rolled random generators for property tests. Every generator draws
// from an explicit engine so a failing seed can be replayed.

#include <random>
#include <string>
#include <vector>

#include "revfocus/types.hpp"

namespace revfocus::testing {

using Rng = std::mt19937_64;

inline constexpr int kPropertyIterations = 300;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline TargetFacet random_target(Rng& rng) {
  return kAllTargets[uniform(rng, 0, kAllTargets.size() - 1)];
}

inline AspectFacet random_aspect(Rng& rng) {
  return kAllAspects[uniform(rng, 0, kAllAspects.size() - 1)];
}

inline Polarity random_polarity(Rng& rng) { return kAllPolarities[uniform(rng, 0, 1)]; }

inline std::string random_word(Rng& rng, std::size_t alphabet = 26) {
  std::string w;
  const auto len = uniform(rng, 1, 6);
  for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + uniform(rng, 0, alphabet - 1));
  return w;
}

inline std::vector<std::string> random_tokens(Rng& rng, std::size_t max_len,
                                              std::size_t vocab = 5) {
  std::vector<std::string> out(uniform(rng, 1, max_len));
  for (auto& t : out) t = "w" + std::to_string(uniform(rng, 0, vocab - 1));
  return out;
}

inline std::string random_text(Rng& rng) {
  static const char* const pieces[] = {"alpha", " ", "Beta", "\n", "\"q\"", "\\", "ü", "—",
                                       "日本", "{x}", "**h**", "\t", "😀", "0.5"};
  std::string s;
  const auto n = uniform(rng, 0, 12);
  for (std::size_t i = 0; i < n; ++i) s += pieces[uniform(rng, 0, std::size(pieces) - 1)];
  return s;
}

inline ReviewPoint random_point(Rng& rng, const std::string& paper_id, std::size_t index,
                                const Origin& origin) {
  ReviewPoint p;
  p.paper_id = paper_id;
  p.point_id = paper_id + ":" + origin.group_id() + ":" + std::to_string(index);
  p.polarity = random_polarity(rng);
  if (uniform(rng, 0, 1) == 1) p.header = random_text(rng);
  p.body = "b" + random_text(rng);
  p.origin = origin;
  return p;
}

inline AnnotatedPoint random_annotated(Rng& rng, const std::string& paper_id, std::size_t index,
                                       const Origin& origin) {
  AnnotatedPoint a;
  a.point = random_point(rng, paper_id, index, origin);
  a.target = random_target(rng);
  a.aspect = random_aspect(rng);
  a.annotator_id = "annotator";
  a.raw_annotator_output = random_text(rng);
  return a;
}

inline std::vector<AnnotatedPoint> random_annotations(Rng& rng, std::size_t papers,
                                                      std::size_t max_points,
                                                      const Origin& origin) {
  std::vector<AnnotatedPoint> out;
  for (std::size_t p = 0; p < papers; ++p) {
    const auto n = uniform(rng, 0, max_points);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(random_annotated(rng, "paper" + std::to_string(p), out.size(), origin));
    }
  }
  return out;
}

}  // namespace revfocus::testing
