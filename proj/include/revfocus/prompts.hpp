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

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "revfocus/gateway.hpp"

namespace revfocus {

/// One prompt file: an optional "[system]" section and a "[user]" section,
/// with {named} placeholders.
struct PromptTemplate {
  std::string name;
  std::string system;
  std::string user;
  std::set<std::string> placeholders;
};

PromptTemplate parse_prompt_template(std::string name, std::string_view text);

/// Substitutes every {placeholder} in one pass; substituted text is not
/// rescanned. Throws kTemplateError when a placeholder has no value.
std::string render_template(std::string_view text,
                            const std::map<std::string, std::string>& vars);

/// The versioned prompt directory (prompts/manifest.json plus template
/// files). manifest_hash() is stamped into every record a prompt produces.
class PromptSet {
 public:
  static PromptSet load(const std::filesystem::path& dir);

  const PromptTemplate& get(const std::string& name) const;
  std::vector<ChatMessage> render(const std::string& name,
                                  const std::map<std::string, std::string>& vars) const;
  const std::string& version() const { return version_; }
  const std::string& manifest_hash() const { return hash_; }

 private:
  std::string version_;
  std::string hash_;
  std::map<std::string, PromptTemplate> templates_;
};

}  // namespace revfocus
