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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "revfocus/error.hpp"
#include "revfocus/serialize.hpp"

namespace revfocus {

/// Version stamped on every stage-file line; readers reject anything else.
inline constexpr int kSchemaVersion = 1;

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

struct StageEntry {
  std::string path;
  std::size_t count = 0;
  std::string sha256;
};

// One JSON object per line with schema_version set. Empty input -> empty text.
std::string encode_stage(const std::vector<json>& records);
// Throws kVersionMismatch or kMalformedRecord(line_no).
std::vector<json> decode_stage(std::string_view text);

template <typename T>
StageEntry persist_stage(const std::vector<T>& records,
                         const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.emplace_back(r);
  const std::string text = encode_stage(lines);
  write_file_atomic(path, text);
  return {path.string(), records.size(), sha256_hex(text)};
}

template <typename T>
std::vector<T> load_stage(const std::filesystem::path& path) {
  std::vector<T> out;
  const auto lines = decode_stage(read_file(path));
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(lines[i].get<T>());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace revfocus
