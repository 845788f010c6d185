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

#include "revfocus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>

namespace revfocus {

namespace {

std::size_t facet_of(const AnnotatedPoint& p, FacetKind kind) {
  return kind == FacetKind::kTarget ? static_cast<std::size_t>(p.target)
                                    : static_cast<std::size_t>(p.aspect);
}

std::vector<std::size_t> facet_counts(const std::vector<AnnotatedPoint>& points, FacetKind kind,
                                      Polarity polarity) {
  std::vector<std::size_t> counts(vocabulary_size(kind), 0);
  for (const auto& p : points) {
    if (p.point.polarity == polarity) ++counts[facet_of(p, kind)];
  }
  return counts;
}

}  // namespace

FocusDistribution focus_distribution(const std::vector<AnnotatedPoint>& points, FacetKind kind,
                                     Polarity polarity) {
  auto counts = facet_counts(points, kind, polarity);
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) {
    throw Error(ErrorCode::kEmptySupport, "no " + std::string(to_string(polarity)) +
                                              " points for " + std::string(to_string(kind)));
  }
  return FocusDistribution::from_counts(kind, polarity, counts);
}

FocusDistribution focus_distribution_or_empty(const std::vector<AnnotatedPoint>& points,
                                              FacetKind kind, Polarity polarity) {
  return FocusDistribution::from_counts(kind, polarity, facet_counts(points, kind, polarity));
}

FocusProfile focus_profile(std::string group_id, const std::vector<AnnotatedPoint>& points) {
  FocusProfile profile;
  profile.group_id = std::move(group_id);
  profile.distributions.resize(4);
  for (auto kind : kAllFacetKinds) {
    for (auto pol : kAllPolarities) {
      profile.distributions[FocusProfile::quadrant_index(kind, pol)] =
          focus_distribution_or_empty(points, kind, pol);
    }
  }
  return profile;
}

double smoothed_kl(std::span<const double> p, std::span<const double> q, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing epsilon must be positive");
  }
  if (p.size() != q.size() || p.empty()) {
    throw Error(ErrorCode::kKindMismatch, "distributions have different supports");
  }
  auto smooth = [epsilon](std::span<const double> w) {
    std::vector<double> out(w.begin(), w.end());
    CompensatedSum total;
    for (auto& x : out) {
      x += epsilon;
      total.add(x);
    }
    for (auto& x : out) x /= total.value();
    return out;
  };
  const auto ps = smooth(p);
  const auto qs = smooth(q);
  CompensatedSum kl;
  for (std::size_t i = 0; i < ps.size(); ++i) kl.add(ps[i] * std::log(ps[i] / qs[i]));
  // Rounding can leave a tiny negative residue for near-equal inputs.
  return std::max(0.0, kl.value());
}

double kl_divergence(const FocusDistribution& p, const FocusDistribution& q, double epsilon) {
  if (p.kind() != q.kind() || p.polarity() != q.polarity()) {
    throw Error(ErrorCode::kKindMismatch,
                std::string(to_string(p.kind())) + "/" + std::string(to_string(p.polarity())) +
                    " vs " + std::string(to_string(q.kind())) + "/" +
                    std::string(to_string(q.polarity())));
  }
  for (const auto* d : {&p, &q}) {
    if (d->support() == 0) {
      throw Error(ErrorCode::kEmptySupport, std::string(to_string(d->kind())) + "/" +
                                                std::string(to_string(d->polarity())));
    }
  }
  return smoothed_kl(p.weights(), q.weights(), epsilon);
}

std::string_view to_string(KlDirection d) {
  return d == KlDirection::kHumanToModel ? "human_to_model" : "model_to_human";
}

KlDirection kl_direction_from_id(std::string_view id) {
  if (id == "human_to_model") return KlDirection::kHumanToModel;
  if (id == "model_to_human") return KlDirection::kModelToHuman;
  throw Error(ErrorCode::kInvalidArgument, "unknown KL direction '" + std::string(id) + "'");
}

FocusKl avg_focus_kl(const FocusProfile& human, const FocusProfile& model, double epsilon,
                     KlDirection direction) {
  if (human.distributions.size() != 4 || model.distributions.size() != 4) {
    throw Error(ErrorCode::kInvalidArgument, "focus profiles must hold four distributions");
  }
  FocusKl out;
  CompensatedSum sum;
  for (std::size_t i = 0; i < out.by_quadrant.size(); ++i) {
    const auto& h = human.distributions[i];
    const auto& m = model.distributions[i];
    out.by_quadrant[i] = direction == KlDirection::kHumanToModel ? kl_divergence(h, m, epsilon)
                                                                 : kl_divergence(m, h, epsilon);
    sum.add(out.by_quadrant[i]);
  }
  out.average = sum.value() / static_cast<double>(out.by_quadrant.size());
  return out;
}

// --- pair agreement ------------------------------------------------------------

std::size_t PairSet::total(Polarity p) const {
  std::size_t n = 0;
  for (const auto& [_, c] : at(p)) n += c;
  return n;
}

void PairSet::add(Polarity p, FacetPair pair, std::size_t count) {
  if (count > 0) at(p)[pair] += count;
}

std::vector<PairSet> build_pair_sets(const std::vector<AnnotatedPoint>& points) {
  std::map<std::string, PairSet> by_paper;
  for (const auto& a : points) {
    auto& set = by_paper[a.point.paper_id];
    set.paper_id = a.point.paper_id;
    set.add(a.point.polarity, {a.target, a.aspect});
  }
  std::vector<PairSet> out;
  out.reserve(by_paper.size());
  for (auto& [_, s] : by_paper) out.push_back(std::move(s));
  return out;
}

F1Result f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  F1Result r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0.0) {
    // 2PR/(P+R) == 2tp/(2tp+fp+fn); the count form avoids compounding rounding.
    r.f1 = static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
  }
  return r;
}

std::string_view to_string(MatchMode m) { return m == MatchMode::kMultiset ? "multiset" : "set"; }

MatchMode match_mode_from_id(std::string_view id) {
  if (id == "multiset") return MatchMode::kMultiset;
  if (id == "set") return MatchMode::kSet;
  throw Error(ErrorCode::kInvalidArgument, "unknown matching mode '" + std::string(id) + "'");
}

std::string_view to_string(LabelMatch m) {
  return m == LabelMatch::kProjected ? "projected" : "pair_attributed";
}

LabelMatch label_match_from_id(std::string_view id) {
  if (id == "projected") return LabelMatch::kProjected;
  if (id == "pair_attributed") return LabelMatch::kPairAttributed;
  throw Error(ErrorCode::kInvalidArgument, "unknown label matching '" + std::string(id) + "'");
}

namespace {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

template <class Key>
Counts match(const std::map<Key, std::size_t>& ref, const std::map<Key, std::size_t>& cand,
             MatchMode mode) {
  auto mass = [mode](std::size_t c) -> std::size_t {
    return mode == MatchMode::kSet ? (c > 0 ? 1 : 0) : c;
  };
  Counts out;
  std::size_t ref_total = 0;
  std::size_t cand_total = 0;
  for (const auto& [k, c] : ref) ref_total += mass(c);
  for (const auto& [k, c] : cand) {
    cand_total += mass(c);
    auto it = ref.find(k);
    if (it != ref.end()) out.tp += std::min(mass(c), mass(it->second));
  }
  out.fp = cand_total - out.tp;
  out.fn = ref_total - out.tp;
  return out;
}

using PairMap = std::map<FacetPair, std::size_t>;

// Pair multiset of one side, restricted to a polarity when given.
PairMap select(const PairSet* s, std::optional<Polarity> polarity) {
  PairMap out;
  if (s == nullptr) return out;
  for (auto pol : kAllPolarities) {
    if (polarity && *polarity != pol) continue;
    for (const auto& [k, c] : s->at(pol)) out[k] += c;
  }
  return out;
}

// Joins both sides on paper_id and calls fn(ref_map, cand_map) per paper, once
// per polarity bucket so that a strength pair never matches a weakness pair.
template <class Fn>
void for_each_paper(const std::vector<PairSet>& reference, const std::vector<PairSet>& candidate,
                    std::optional<Polarity> polarity, Fn&& fn) {
  std::map<std::string, std::pair<const PairSet*, const PairSet*>> joined;
  for (const auto& s : reference) joined[s.paper_id].first = &s;
  for (const auto& s : candidate) joined[s.paper_id].second = &s;
  for (const auto& [paper, sides] : joined) {
    std::vector<std::pair<PairMap, PairMap>> buckets;
    for (auto pol : kAllPolarities) {
      if (polarity && *polarity != pol) continue;
      buckets.emplace_back(select(sides.first, pol), select(sides.second, pol));
    }
    fn(paper, buckets);
  }
}

}  // namespace

F1Result pair_multiset_f1(const std::vector<PairSet>& reference,
                          const std::vector<PairSet>& candidate, std::optional<Polarity> polarity,
                          MatchMode mode) {
  Counts total;
  for_each_paper(reference, candidate, polarity, [&](const std::string&, const auto& buckets) {
    for (const auto& [ref, cand] : buckets) {
      auto c = match(ref, cand, mode);
      total.tp += c.tp;
      total.fp += c.fp;
      total.fn += c.fn;
    }
  });
  return f1_from_counts(total.tp, total.fp, total.fn);
}

double pair_macro_f1(const std::vector<PairSet>& reference, const std::vector<PairSet>& candidate,
                     std::optional<Polarity> polarity, MatchMode mode) {
  CompensatedSum sum;
  std::size_t papers = 0;
  for_each_paper(reference, candidate, polarity, [&](const std::string&, const auto& buckets) {
    Counts paper;
    for (const auto& [ref, cand] : buckets) {
      auto c = match(ref, cand, mode);
      paper.tp += c.tp;
      paper.fp += c.fp;
      paper.fn += c.fn;
    }
    if (paper.tp + paper.fp + paper.fn == 0) return;
    sum.add(f1_from_counts(paper.tp, paper.fp, paper.fn).f1);
    ++papers;
  });
  return papers == 0 ? 0.0 : sum.value() / static_cast<double>(papers);
}

std::vector<F1Result> per_label_f1(const std::vector<PairSet>& reference,
                                   const std::vector<PairSet>& candidate, FacetKind axis,
                                   std::optional<Polarity> polarity, LabelMatch label_match,
                                   MatchMode mode) {
  const std::size_t n = vocabulary_size(axis);
  auto label = [axis](const FacetPair& p) {
    return axis == FacetKind::kTarget ? static_cast<std::size_t>(p.first)
                                      : static_cast<std::size_t>(p.second);
  };
  std::vector<Counts> counts(n);

  for_each_paper(reference, candidate, polarity, [&](const std::string&, const auto& buckets) {
    for (const auto& [ref, cand] : buckets) {
      if (label_match == LabelMatch::kProjected) {
        std::map<std::size_t, std::size_t> r;
        std::map<std::size_t, std::size_t> c;
        for (const auto& [k, v] : ref) r[label(k)] += v;
        for (const auto& [k, v] : cand) c[label(k)] += v;
        for (std::size_t f = 0; f < n; ++f) {
          std::map<std::size_t, std::size_t> rf;
          std::map<std::size_t, std::size_t> cf;
          if (auto it = r.find(f); it != r.end()) rf.emplace(*it);
          if (auto it = c.find(f); it != c.end()) cf.emplace(*it);
          auto m = match(rf, cf, mode);
          counts[f].tp += m.tp;
          counts[f].fp += m.fp;
          counts[f].fn += m.fn;
        }
      } else {
        for (std::size_t f = 0; f < n; ++f) {
          PairMap rf;
          PairMap cf;
          for (const auto& [k, v] : ref) {
            if (label(k) == f) rf.emplace(k, v);
          }
          for (const auto& [k, v] : cand) {
            if (label(k) == f) cf.emplace(k, v);
          }
          auto m = match(rf, cf, mode);
          counts[f].tp += m.tp;
          counts[f].fp += m.fp;
          counts[f].fn += m.fn;
        }
      }
    }
  });

  std::vector<F1Result> out;
  out.reserve(n);
  for (const auto& c : counts) out.push_back(f1_from_counts(c.tp, c.fp, c.fn));
  return out;
}

// --- counts ------------------------------------------------------------------

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

namespace {

struct PaperCount {
  std::size_t strengths = 0;
  std::size_t weaknesses = 0;
};

CountStats summarize(std::string group_id, const std::vector<PaperCount>& papers) {
  CountStats out;
  out.group_id = std::move(group_id);
  out.n_papers = papers.size();
  std::size_t s = 0;
  std::size_t w = 0;
  for (const auto& p : papers) {
    s += p.strengths;
    w += p.weaknesses;
    ++out.strength_histogram[p.strengths];
    ++out.weakness_histogram[p.weaknesses];
    ++out.total_histogram[p.strengths + p.weaknesses];
  }
  if (!papers.empty()) {
    const double n = static_cast<double>(papers.size());
    out.mean_strengths = static_cast<double>(s) / n;
    out.mean_weaknesses = static_cast<double>(w) / n;
    out.mean_total = static_cast<double>(s + w) / n;
  }
  return out;
}

// group -> paper -> counts
std::map<std::string, std::map<std::string, PaperCount>> tally(
    const std::vector<ReviewPoint>& points) {
  std::map<std::string, std::map<std::string, PaperCount>> out;
  for (const auto& p : points) {
    auto& c = out[p.origin.group_id()][p.paper_id];
    (p.polarity == Polarity::kStrength ? c.strengths : c.weaknesses) += 1;
  }
  return out;
}

}  // namespace

std::vector<CountStats> count_stats(const std::vector<ReviewPoint>& points) {
  std::vector<CountStats> out;
  for (const auto& [group, papers] : tally(points)) {
    std::vector<PaperCount> v;
    v.reserve(papers.size());
    for (const auto& [_, c] : papers) v.push_back(c);
    out.push_back(summarize(group, v));
  }
  return out;
}

CountStats pooled_model_count_stats(const std::vector<ReviewPoint>& points) {
  std::vector<PaperCount> v;
  for (const auto& [group, papers] : tally(points)) {
    if (group == Origin::expert().group_id()) continue;
    for (const auto& [_, c] : papers) v.push_back(c);
  }
  return summarize("llm_pool", v);
}

LengthStats length_stats(const std::vector<std::string>& texts) {
  LengthStats out;
  out.n_reviews = texts.size();
  if (texts.empty()) return out;
  std::size_t chars = 0;
  std::size_t tokens = 0;
  for (const auto& t : texts) {
    // Code points, not bytes.
    for (unsigned char ch : t) {
      if ((ch & 0xC0) != 0x80) ++chars;
    }
    bool in_token = false;
    for (unsigned char ch : t) {
      const bool space = std::isspace(ch) != 0;
      if (!space && !in_token) ++tokens;
      in_token = !space;
    }
  }
  const double n = static_cast<double>(texts.size());
  out.mean_chars = static_cast<double>(chars) / n;
  out.mean_whitespace_tokens = static_cast<double>(tokens) / n;
  return out;
}

}  // namespace revfocus
