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

#include "revfocus/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "revfocus/serialize.hpp"

namespace revfocus {

namespace {

struct Item {
  Polarity polarity = Polarity::kStrength;
  std::optional<std::string> header;
  std::string text;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<Polarity> lenient_polarity(std::string_view raw) {
  const std::string p = lower(trim(raw));
  if (p == "strength" || p == "strengths") return Polarity::kStrength;
  if (p == "weakness" || p == "weaknesses") return Polarity::kWeakness;
  return std::nullopt;
}

std::vector<Item> parse_items(std::string_view raw) {
  auto block = find_json_block(raw);
  if (!block) throw Error(ErrorCode::kParseFailed, "no JSON block in reply");
  json doc = json::parse(*block, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("points") ||
      !doc["points"].is_array()) {
    throw Error(ErrorCode::kParseFailed, "reply has no \"points\" array");
  }
  std::vector<Item> items;
  for (const auto& p : doc["points"]) {
    if (!p.is_object() || !p.contains("polarity") || !p["polarity"].is_string()) {
      throw Error(ErrorCode::kParseFailed, "point without polarity");
    }
    auto pol = lenient_polarity(p["polarity"].get<std::string>());
    if (!pol) throw Error(ErrorCode::kParseFailed, "unknown polarity " + p["polarity"].dump());
    Item item;
    item.polarity = *pol;
    item.text = trim(p.value("text", ""));
    if (item.text.empty()) throw Error(ErrorCode::kParseFailed, "point with empty text");
    if (p.contains("header") && p["header"].is_string()) {
      auto h = trim(p["header"].get<std::string>());
      if (!h.empty()) item.header = std::move(h);
    }
    items.push_back(std::move(item));
  }
  return items;
}

// what() without the leading "<code>: ".
std::string strip_code(const Error& e) {
  std::string_view w = e.what();
  const auto prefix = error_code_name(e.code()).size() + 2;
  return std::string(w.size() >= prefix ? w.substr(prefix) : w);
}

std::string render_points(const std::vector<DraftPoint>& drafts) {
  std::string out;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    out += std::to_string(i + 1) + ". [" + std::string(to_string(drafts[i].polarity)) +
           "] " + drafts[i].text + "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string render_reviews(const std::vector<IndividualReview>& reviews) {
  std::string out;
  for (const auto& r : reviews) {
    if (!out.empty()) out += "\n\n";
    out += "### Review by " + r.reviewer_id + "\n" + r.text;
  }
  return out;
}

// Empty when items line up with the reference positions and polarities.
std::optional<std::string> alignment_problem(const std::vector<Item>& items,
                                             const std::vector<DraftPoint>& reference) {
  if (items.size() != reference.size()) {
    return "expected " + std::to_string(reference.size()) + " points, got " +
           std::to_string(items.size());
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].polarity != reference[i].polarity) {
      return "polarity changed at position " + std::to_string(i + 1);
    }
  }
  return std::nullopt;
}

void bump_stage(std::vector<DraftPoint>& drafts, DraftStage from, DraftStage to) {
  for (auto& d : drafts) {
    if (d.stage != from) {
      throw Error(ErrorCode::kInvalidArgument,
                  "draft at stage " + std::string(to_string(d.stage)) + ", expected " +
                      std::string(to_string(from)));
    }
    d.stage = to;
  }
}

bool is_section_heading(std::string_view line, std::optional<Polarity>* which) {
  std::string s = trim(line);
  const bool marked = !s.empty() && (s[0] == '#' || s[0] == '*' || s[0] == '_');
  s.erase(0, s.find_first_not_of("#*_ \t"));
  while (!s.empty() && (s.back() == '*' || s.back() == '_' || s.back() == ':' ||
                        s.back() == ' ')) {
    s.pop_back();
  }
  // Headings are short lines; a bullet is never a heading.
  if (s.empty() || s.size() > 40) return false;
  const std::string l = lower(s);
  if (l == "strengths" || l == "strength" || l == "pros") {
    *which = Polarity::kStrength;
    return true;
  }
  if (l == "weaknesses" || l == "weakness" || l == "cons") {
    *which = Polarity::kWeakness;
    return true;
  }
  if (marked && line.find_first_not_of(" \t") == line.find('#')) {
    *which = std::nullopt;  // some other markdown heading closes the section
    return true;
  }
  return false;
}

// Length of a top-level bullet marker ("- ", "* ", "+ ", "1. ", "2) ") or 0.
std::size_t bullet_marker(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && i < 1 && line[i] == ' ') ++i;
  if (i + 1 < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '+') &&
      line[i + 1] == ' ') {
    return i + 2;
  }
  std::size_t j = i;
  while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
  if (j > i && j + 1 < line.size() && (line[j] == '.' || line[j] == ')') &&
      line[j + 1] == ' ') {
    return j + 2;
  }
  return 0;
}

Item split_header(Polarity polarity, const std::string& text) {
  Item item;
  item.polarity = polarity;
  std::string t = trim(text);
  if (t.rfind("**", 0) == 0) {
    const auto close = t.find("**", 2);
    if (close != std::string::npos) {
      std::string header = trim(t.substr(2, close - 2));
      while (!header.empty() && (header.back() == ':' || header.back() == '.')) {
        header.pop_back();
      }
      std::string rest = t.substr(close + 2);
      const auto b = rest.find_first_not_of(" \t:-–");
      rest = b == std::string::npos ? std::string() : trim(rest.substr(b));
      if (!header.empty()) item.header = header;
      item.text = rest.empty() ? header : rest;
      return item;
    }
  }
  item.text = t;
  return item;
}

std::vector<Item> parse_markdown(std::string_view raw) {
  std::vector<Item> items;
  std::optional<Polarity> section;
  std::optional<std::string> current;
  Polarity current_polarity = Polarity::kStrength;
  auto flush = [&] {
    if (current) {
      Item item = split_header(current_polarity, *current);
      if (!item.text.empty()) items.push_back(std::move(item));
      current.reset();
    }
  };
  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::optional<Polarity> heading;
    if (bullet_marker(line) == 0 && is_section_heading(line, &heading)) {
      flush();
      section = heading;
      continue;
    }
    if (!section) continue;
    if (const auto m = bullet_marker(line); m > 0) {
      flush();
      current = line.substr(m);
      current_polarity = *section;
      continue;
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (current) {
      *current += " " + t;
    }
  }
  flush();
  return items;
}

std::vector<ReviewPoint> to_points(const std::vector<Item>& items,
                                   const std::string& paper_id, const Origin& origin) {
  std::vector<ReviewPoint> out;
  out.reserve(items.size());
  const std::string tag = origin.group_id() == "human" ? "expert" : origin.group_id();
  for (std::size_t i = 0; i < items.size(); ++i) {
    ReviewPoint p;
    p.point_id = paper_id + ":" + tag + ":" + std::to_string(i);
    p.paper_id = paper_id;
    p.polarity = items[i].polarity;
    p.header = items[i].header;
    p.body = items[i].text;
    p.origin = origin;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Item> parse_structured_review(std::string_view raw) {
  auto block = find_json_block(raw);
  if (!block) return {};
  json doc = json::parse(*block, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return {};
  std::vector<Item> items;
  for (const auto& [key, polarity] :
       {std::pair{"strengths", Polarity::kStrength}, std::pair{"weaknesses", Polarity::kWeakness}}) {
    if (!doc.contains(key) || !doc[key].is_array()) continue;
    for (const auto& entry : doc[key]) {
      Item item;
      item.polarity = polarity;
      if (entry.is_string()) {
        item = split_header(polarity, entry.get<std::string>());
      } else if (entry.is_object()) {
        item.text = trim(entry.value("body", entry.value("text", "")));
        auto header = trim(entry.value("header", ""));
        if (!header.empty()) item.header = header;
        if (item.text.empty() && item.header) item.text = *item.header;
      }
      if (!item.text.empty()) items.push_back(std::move(item));
    }
  }
  return items;
}

}  // namespace

std::optional<std::string> find_json_block(std::string_view raw) {
  const auto fence = raw.find("```");
  if (fence != std::string_view::npos) {
    auto body_start = raw.find('\n', fence);
    if (body_start == std::string_view::npos) return std::nullopt;
    ++body_start;
    const auto close = raw.find("```", body_start);
    if (close == std::string_view::npos) return std::nullopt;
    return std::string(raw.substr(body_start, close - body_start));
  }
  const std::string t = trim(raw);
  if (!t.empty() && t.front() == '{' && t.back() == '}') return t;
  return std::nullopt;
}

std::vector<DraftPoint> parse_draft_points(std::string_view raw, DraftStage stage) {
  std::vector<DraftPoint> out;
  for (auto& item : parse_items(raw)) out.push_back({item.polarity, std::move(item.text), stage});
  if (out.empty()) throw Error(ErrorCode::kParseFailed, "reply has no points");
  return out;
}

bool passes_self_containment_screen(std::string_view text) {
  static const std::regex kReference(R"(reviewer\s*#?\s*\d|meta-?review)",
                                     std::regex::icase | std::regex::ECMAScript);
  return !std::regex_search(text.begin(), text.end(), kReference);
}

ExpertChain::ExpertChain(ChatClient& client, const PromptSet& prompts, StageModel model)
    : client_(client), prompts_(prompts), model_(std::move(model)) {}

std::vector<DraftPoint> ExpertChain::ask_points(std::vector<ChatMessage> messages,
                                                DraftStage stage,
                                                const std::vector<DraftPoint>* reference) {
  auto request = [&](const std::vector<ChatMessage>& msgs) {
    ChatRequest req{model_.endpoint_id, model_.model_id, msgs, model_.temperature,
                    model_.max_output_tokens, ResponseHint::kStructured};
    return client_.complete(req).text;
  };
  std::string raw = request(messages);
  for (int attempt = 0;; ++attempt) {
    std::vector<Item> items;
    std::optional<ChatMessage> retry;
    ErrorCode failure = ErrorCode::kParseFailed;
    std::string problem;
    try {
      items = parse_items(raw);
      if (items.empty()) throw Error(ErrorCode::kParseFailed, "reply has no points");
    } catch (const Error& e) {
      problem = strip_code(e);
      retry = prompts_.render("retry_structured", {}).back();
    }
    if (!retry && reference != nullptr) {
      if (auto drift = alignment_problem(items, *reference)) {
        failure = ErrorCode::kCardinalityDrift;
        problem = *drift;
        retry = prompts_.render("retry_cardinality",
                                {{"got", std::to_string(items.size())},
                                 {"expected", std::to_string(reference->size())}})
                    .back();
      }
    }
    if (!retry) {
      std::vector<DraftPoint> out;
      for (auto& item : items) out.push_back({item.polarity, std::move(item.text), stage});
      return out;
    }
    if (attempt == 1) {
      throw Error(failure, problem + " (raw reply: " + raw.substr(0, 300) + ")");
    }
    messages.push_back({Role::kAssistant, raw});
    messages.push_back(*retry);
    raw = request(messages);
  }
}

std::vector<DraftPoint> ExpertChain::extract_meta_points(std::string_view meta_review) {
  if (trim(meta_review).empty()) {
    throw Error(ErrorCode::kEmptyMetaReview, "meta-review is empty");
  }
  return ask_points(prompts_.render("meta_extract", {{"meta_review", std::string(meta_review)}}),
                    DraftStage::kMetaExtracted, nullptr);
}

std::vector<DraftPoint> ExpertChain::augment_points(
    const std::vector<DraftPoint>& drafts, const std::vector<IndividualReview>& reviews) {
  std::vector<DraftPoint> bumped = drafts;
  bump_stage(bumped, DraftStage::kMetaExtracted, DraftStage::kAugmented);
  if (drafts.empty()) return bumped;
  if (reviews.empty()) {
    spdlog::warn("no individual reviews available; passing {} draft(s) through unaugmented",
                 drafts.size());
    return bumped;
  }
  return ask_points(prompts_.render("augment", {{"points", render_points(drafts)},
                                                {"individual_reviews", render_reviews(reviews)}}),
                    DraftStage::kAugmented, &drafts);
}

std::vector<ReviewPoint> ExpertChain::paraphrase_points(const std::vector<DraftPoint>& drafts,
                                                        const std::string& paper_id) {
  std::vector<DraftPoint> checked = drafts;
  bump_stage(checked, DraftStage::kAugmented, DraftStage::kParaphrased);
  if (drafts.empty()) return {};

  auto messages = prompts_.render("paraphrase", {{"points", render_points(drafts)}});
  auto request = [&](const std::vector<ChatMessage>& msgs) {
    ChatRequest req{model_.endpoint_id, model_.model_id, msgs, model_.temperature,
                    model_.max_output_tokens, ResponseHint::kStructured};
    return client_.complete(req).text;
  };
  std::string raw = request(messages);
  for (int attempt = 0;; ++attempt) {
    std::optional<ChatMessage> retry;
    ErrorCode failure = ErrorCode::kParseFailed;
    std::string problem;
    std::vector<Item> items;
    try {
      items = parse_items(raw);
    } catch (const Error& e) {
      problem = strip_code(e);
      retry = prompts_.render("retry_structured", {}).back();
    }
    if (!retry) {
      if (auto drift = alignment_problem(items, drafts)) {
        failure = ErrorCode::kCardinalityDrift;
        problem = *drift;
        retry = prompts_.render("retry_cardinality",
                                {{"got", std::to_string(items.size())},
                                 {"expected", std::to_string(drafts.size())}})
                    .back();
      }
    }
    if (!retry) {
      const bool clean = std::all_of(items.begin(), items.end(), [](const Item& i) {
        return passes_self_containment_screen(i.text) &&
               passes_self_containment_screen(i.header.value_or(""));
      });
      if (!clean) {
        problem = "points still refer to reviewers or the meta-review";
        retry = prompts_.render("retry_references", {}).back();
      }
    }
    if (!retry) return to_points(items, paper_id, Origin::expert());
    if (attempt == 1) throw Error(failure, problem);
    messages.push_back({Role::kAssistant, raw});
    messages.push_back(*retry);
    raw = request(messages);
  }
}

ExpertChain::Outcome ExpertChain::run(const ReviewBundle& bundle) {
  Outcome outcome;
  outcome.paper_id = bundle.paper_id;
  try {
    auto drafts = extract_meta_points(bundle.meta_review);
    drafts = augment_points(drafts, bundle.individual_reviews);
    outcome.points = paraphrase_points(drafts, bundle.paper_id);
  } catch (const std::exception& e) {
    outcome.points.clear();
    outcome.excluded = error_info(e);
    spdlog::warn("paper {} excluded from expert extraction: {}", bundle.paper_id, e.what());
  }
  return outcome;
}

ParsedReview parse_review_points(std::string_view raw_text, const std::string& paper_id,
                                 const Origin& origin) {
  auto items = parse_structured_review(raw_text);
  if (!items.empty()) return {to_points(items, paper_id, origin), ParseMode::kStructured};
  items = parse_markdown(raw_text);
  if (!items.empty()) return {to_points(items, paper_id, origin), ParseMode::kFallbackMarkdown};
  throw Error(ErrorCode::kParseFailed, "no strengths or weaknesses found in review of " + paper_id);
}

std::string truncate_to_tokens(std::string_view text, std::size_t budget,
                               std::size_t* original_tokens) {
  std::size_t tokens = 0;
  std::size_t cut = text.size();
  bool in_token = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    if (!space && !in_token) {
      ++tokens;
      if (tokens == budget + 1 && cut == text.size()) cut = i;
    }
    in_token = !space;
  }
  if (original_tokens != nullptr) *original_tokens = tokens;
  if (tokens <= budget) return std::string(text);
  return trim(text.substr(0, cut));
}

GeneratedReview generate_review(ChatClient& client, const PromptSet& prompts,
                                const PaperRecord& paper, const StageModel& model,
                                const GenerationOptions& options) {
  if (trim(paper.body_text).empty()) {
    throw Error(ErrorCode::kEmptyPaperText, "paper " + paper.paper_id + " has no body text");
  }
  GeneratedReview review;
  review.paper_id = paper.paper_id;
  review.model_id = model.output_id();
  review.prompt_manifest_hash = prompts.manifest_hash();

  std::size_t original = 0;
  std::string body = truncate_to_tokens(paper.body_text, options.max_paper_tokens, &original);
  if (original > options.max_paper_tokens) {
    review.source_meta["truncation_note"] =
        "paper text truncated from " + std::to_string(original) + " to " +
        std::to_string(options.max_paper_tokens) + " whitespace tokens";
    spdlog::info("{}: {}", paper.paper_id, review.source_meta["truncation_note"]);
  }
  ChatRequest req{model.endpoint_id, model.model_id,
                  prompts.render("generate_review", {{"paper_text", body}}),
                  model.temperature, model.max_output_tokens, ResponseHint::kStructured};
  review.raw_text = client.complete(req).text;
  try {
    auto parsed = parse_review_points(review.raw_text, paper.paper_id,
                                      Origin::model(model.output_id()));
    review.parsed = std::move(parsed.points);
    review.parse_mode = parsed.mode;
  } catch (const Error& e) {
    review.parse_failed = true;
    spdlog::warn("{}", e.what());
  }
  return review;
}

}  // namespace revfocus
