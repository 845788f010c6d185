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

#include "revfocus/text_metrics.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "revfocus/error.hpp"
#include "revfocus/metrics.hpp"

namespace revfocus {

namespace {

// Decodes one UTF-8 sequence; invalid bytes come back as U+FFFD, length 1.
char32_t decode(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

// Non-ASCII code points count as word characters unless they fall in a
// punctuation, symbol or space block.
bool is_word(char32_t c) {
  if (c < 0x80) return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  if (c <= 0xBF) return c == 0xAA || c == 0xB5 || c == 0xBA;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c >= 0xFE10 && c <= 0xFE6F) return false;
  if (c >= 0xFF00 && c <= 0xFF0F) return false;
  if (c >= 0xFF1A && c <= 0xFF20) return false;
  if (c >= 0xFF3B && c <= 0xFF40) return false;
  if (c >= 0xFF5B && c <= 0xFF65) return false;
  if (c >= 0x1F000 && c <= 0x1FAFF) return false;
  if (c == 0xFFFD || c == 0xFEFF) return false;
  return true;
}

bool is_letter(char32_t c) { return is_word(c) && !is_digit(c); }

char32_t lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  // Latin Extended-A pairs upper/lower on even/odd code points.
  if (c >= 0x100 && c <= 0x137 && c % 2 == 0) return c + 1;
  if (c >= 0x14A && c <= 0x177 && c % 2 == 0) return c + 1;
  return c;
}

bool is_joiner(char32_t c, char32_t prev, char32_t next) {
  if ((c == '\'' || c == 0x2019) && is_letter(prev) && is_letter(next)) return true;
  if ((c == '.' || c == ',') && is_digit(prev) && is_digit(next)) return true;
  return false;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) cps.push_back(decode(text, i));

  TokenSeq out;
  std::string current;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    bool keep = is_word(c);
    if (!keep && !current.empty() && i + 1 < cps.size()) {
      keep = is_joiner(c, cps[i - 1], cps[i + 1]);
    }
    if (keep) {
      encode(lower(c), current);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

namespace {

void require_tokens(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) {
    throw Error(ErrorCode::kEmptyText,
                candidate.empty() ? "candidate has no tokens" : "reference has no tokens");
  }
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], row[j - 1]);
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

}  // namespace

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  require_tokens(candidate, reference);
  const std::size_t l = lcs_length(candidate, reference);
  if (l == 0) return 0.0;
  const double p = static_cast<double>(l) / static_cast<double>(candidate.size());
  const double r = static_cast<double>(l) / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

NgramPrecision ngram_precision(const TokenSeq& candidate, const TokenSeq& reference,
                               std::size_t n) {
  NgramPrecision out;
  if (n == 0 || candidate.size() < n) return out;
  auto grams = [n](const TokenSeq& t) {
    std::map<std::vector<std::string>, std::size_t> m;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      ++m[std::vector<std::string>(t.begin() + static_cast<std::ptrdiff_t>(i),
                                   t.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return m;
  };
  const auto cg = grams(candidate);
  const auto rg = grams(reference);
  for (const auto& [g, c] : cg) {
    out.total += c;
    if (auto it = rg.find(g); it != rg.end()) out.matches += std::min(c, it->second);
  }
  return out;
}

double bleu_4(const TokenSeq& candidate, const TokenSeq& reference) {
  require_tokens(candidate, reference);
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto np = ngram_precision(candidate, reference, n);
    double p = kBleuSmoothing;
    if (np.total > 0) {
      const double matches = np.matches == 0 ? kBleuSmoothing : static_cast<double>(np.matches);
      p = matches / static_cast<double>(np.total);
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / 4.0);
}

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> weights_for(std::size_t n, const TokenSeq& tokens,
                                const std::map<std::string, double>& idf) {
  std::vector<double> w(n, 1.0);
  if (idf.empty()) return w;
  if (tokens.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "idf weighting needs one token per vector");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (auto it = idf.find(tokens[i]); it != idf.end()) w[i] = it->second;
  }
  return w;
}

double weighted_best(const std::vector<std::vector<double>>& from,
                     const std::vector<std::vector<double>>& to, const std::vector<double>& w,
                     const std::vector<double>& from_norm, const std::vector<double>& to_norm) {
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < to.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < from[i].size(); ++k) dot += from[i][k] * to[j][k];
      best = std::max(best, dot / (from_norm[i] * to_norm[j]));
    }
    num.add(w[i] * best);
    den.add(w[i]);
  }
  if (den.value() <= 0.0) throw Error(ErrorCode::kInvalidArgument, "idf weights sum to zero");
  return num.value() / den.value();
}

}  // namespace

EmbedScore greedy_embed_score(const std::vector<std::vector<double>>& cand,
                              const std::vector<std::vector<double>>& ref,
                              const std::map<std::string, double>& idf,
                              const TokenSeq& cand_tokens, const TokenSeq& ref_tokens) {
  if (cand.empty() || ref.empty()) throw Error(ErrorCode::kEmptyText, "no token embeddings");
  const std::size_t dim = cand.front().size();
  auto norms = [dim](const std::vector<std::vector<double>>& vs) {
    std::vector<double> out;
    out.reserve(vs.size());
    for (const auto& v : vs) {
      if (v.size() != dim) throw Error(ErrorCode::kInvalidArgument, "embedding sizes differ");
      const double n = norm(v);
      if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "zero embedding vector");
      out.push_back(n);
    }
    return out;
  };
  const auto cn = norms(cand);
  const auto rn = norms(ref);
  if (idf.empty()) spdlog::debug("embedding score: no idf weights, using uniform weights");
  EmbedScore s;
  s.recall = weighted_best(ref, cand, weights_for(ref.size(), ref_tokens, idf), rn, cn);
  s.precision = weighted_best(cand, ref, weights_for(cand.size(), cand_tokens, idf), cn, rn);
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

std::optional<EmbedScore> embed_score(EmbeddingBackend* backend, const TokenSeq& candidate,
                                      const TokenSeq& reference,
                                      const std::map<std::string, double>& idf) {
  if (backend == nullptr) return std::nullopt;
  try {
    return greedy_embed_score(backend->embed(candidate), backend->embed(reference), idf,
                              candidate, reference);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBackendUnavailable) throw;
    spdlog::warn("embedding backend {} unavailable: {}", backend->id(), e.what());
    return std::nullopt;
  }
}

}  // namespace revfocus
