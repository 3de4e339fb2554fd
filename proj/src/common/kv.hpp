// Copyright 2026 The mapcast Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mapcast {

/// Ordered `key = value` document. Duplicate keys are kept in order (the synth
/// manifest repeats `event` lines); `#` starts a comment line.
class KvDocument {
 public:
  using Entry = std::pair<std::string, std::string>;

  static KvDocument parse(std::string_view text, const std::string& origin);
  static KvDocument load(const std::filesystem::path& path);

  void add(std::string key, std::string value);
  void add_comment(std::string text);

  /// Last value for key, if any.
  std::optional<std::string> get(std::string_view key) const;
  std::vector<std::string> get_all(std::string_view key) const;

  const std::vector<Entry>& entries() const { return entries_; }

  std::string to_string() const;
  void save(const std::filesystem::path& path) const;

 private:
  // comments are stored as entries with an empty key and the text as value
  std::vector<Entry> entries_;
};

std::string format_double(double v);
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);
std::vector<std::string> split_list(std::string_view text, char sep = ',');
std::string_view trim(std::string_view s);

/// Writes bytes atomically enough for our purposes; throws Io on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mapcast
