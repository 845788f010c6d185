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

#include "revfocus/prompts.hpp"

#include <cctype>

#include "revfocus/stage_io.hpp"

namespace revfocus {

namespace {

constexpr std::string_view kSystemTag = "[system]\n";
constexpr std::string_view kUserTag = "[user]\n";

bool is_placeholder_char(char c) {
  return std::islower(static_cast<unsigned char>(c)) || c == '_';
}

// Calls fn(name, begin, end) for each {name} occurrence.
template <typename Fn>
void scan_placeholders(std::string_view text, Fn&& fn) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_placeholder_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      fn(std::string(text.substr(i + 1, j - i - 1)), i, j + 1);
      i = j;
    }
  }
}

std::string trim_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

PromptTemplate parse_prompt_template(std::string name, std::string_view text) {
  PromptTemplate t;
  t.name = std::move(name);
  const auto user_pos = text.find(kUserTag);
  if (user_pos == std::string_view::npos) {
    throw Error(ErrorCode::kTemplateError, "template '" + t.name + "' has no [user] section");
  }
  if (text.substr(0, kSystemTag.size()) == kSystemTag) {
    t.system = trim_trailing_newlines(
        std::string(text.substr(kSystemTag.size(), user_pos - kSystemTag.size())));
  }
  t.user = trim_trailing_newlines(std::string(text.substr(user_pos + kUserTag.size())));
  for (const auto* part : {&t.system, &t.user}) {
    scan_placeholders(*part, [&](const std::string& n, std::size_t, std::size_t) {
      t.placeholders.insert(n);
    });
  }
  return t;
}

std::string render_template(std::string_view text,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t last = 0;
  scan_placeholders(text, [&](const std::string& n, std::size_t b, std::size_t e) {
    auto it = vars.find(n);
    if (it == vars.end()) {
      throw Error(ErrorCode::kTemplateError, "no value for placeholder {" + n + "}");
    }
    out.append(text.substr(last, b - last));
    out.append(it->second);
    last = e;
  });
  out.append(text.substr(last));
  return out;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  json manifest = json::parse(read_file(dir / "manifest.json"), nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("templates")) {
    throw Error(ErrorCode::kConfigError, "bad prompt manifest in " + dir.string());
  }
  PromptSet set;
  set.version_ = manifest.value("version", "");
  std::string digest_input = "version\n" + set.version_ + "\n";
  for (const auto& [name, file] : manifest["templates"].items()) {
    const std::string text = read_file(dir / file.get<std::string>());
    set.templates_.emplace(name, parse_prompt_template(name, text));
    digest_input += name + "\n" + std::to_string(text.size()) + "\n" + text;
  }
  set.hash_ = sha256_hex(digest_input);
  return set;
}

const PromptTemplate& PromptSet::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kTemplateError, "no prompt template '" + name + "'");
  }
  return it->second;
}

std::vector<ChatMessage> PromptSet::render(
    const std::string& name, const std::map<std::string, std::string>& vars) const {
  const auto& t = get(name);
  std::vector<ChatMessage> messages;
  if (!t.system.empty()) messages.push_back({Role::kSystem, render_template(t.system, vars)});
  messages.push_back({Role::kUser, render_template(t.user, vars)});
  return messages;
}

}  // namespace revfocus
