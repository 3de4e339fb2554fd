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

#include "common/kv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace mapcast {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

KvDocument KvDocument::parse(std::string_view text, const std::string& origin) {
  KvDocument doc;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    ++line_no;
    pos = nl + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw_data(origin + ":" + std::to_string(line_no) +
                 ": expected 'key = value', got '" + std::string(line) + "'");
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw_data(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    doc.add(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return doc;
}

KvDocument KvDocument::load(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

void KvDocument::add(std::string key, std::string value) {
  entries_.emplace_back(std::move(key), std::move(value));
}

void KvDocument::add_comment(std::string text) {
  entries_.emplace_back(std::string{}, std::move(text));
}

std::optional<std::string> KvDocument::get(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->first.empty() && it->first == key) return it->second;
  }
  return std::nullopt;
}

std::vector<std::string> KvDocument::get_all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (!k.empty() && k == key) out.push_back(v);
  }
  return out;
}

std::string KvDocument::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    if (k.empty()) {
      out += "# " + v + "\n";
    } else {
      out += k + " = " + v + "\n";
    }
  }
  return out;
}

void KvDocument::save(const std::filesystem::path& path) const {
  write_text_file(path, to_string());
}

std::string format_double(double v) {
  // shortest representation that round-trips
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  const auto t = trim(text);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  auto res = std::from_chars(t.data(), end, v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw_usage(std::string(what) + ": not a number: '" + std::string(t) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  const auto t = trim(text);
  std::int64_t v = 0;
  const auto* end = t.data() + t.size();
  auto res = std::from_chars(t.data(), end, v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw_usage(std::string(what) + ": not an integer: '" + std::string(t) +
                "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  const auto t = trim(text);
  std::uint64_t v = 0;
  const auto* end = t.data() + t.size();
  auto res = std::from_chars(t.data(), end, v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw_usage(std::string(what) + ": not an unsigned 64-bit integer: '" + std::string(t) +
                "'");
  }
  return v;
}

bool parse_bool(std::string_view text, std::string_view what) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw_usage(std::string(what) + ": not a boolean: '" + std::string(t) + "'");
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto next = text.find(sep, pos);
    if (next == std::string_view::npos) next = text.size();
    auto item = trim(text.substr(pos, next - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = next + 1;
  }
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw_io("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mapcast
