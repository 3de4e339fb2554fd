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

#include "signal/window_cache.hpp"

#include <fstream>

#include "common/binio.hpp"
#include "common/error.hpp"

namespace mapcast::signal {

using namespace binio;

void write_window_cache(std::ostream& out, const std::vector<WindowPair>& windows,
                        const WindowGeometry& geom) {
  put_magic(out, "HFWC");
  put_le<std::uint32_t>(out, kWindowCacheVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(geom.in_len));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(geom.out_len));
  put_le<std::uint64_t>(out, windows.size());
  for (const auto& w : windows) {
    if (w.input.size() != geom.in_len || w.target.size() != geom.out_len) {
      throw_data("window cache: window geometry does not match header");
    }
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(w.label));
    for (double v : w.input) put_f64(out, v);
    for (double v : w.target) put_f64(out, v);
    put_le<std::uint8_t>(out, w.input_rpm ? 1 : 0);
    if (w.input_rpm) {
      for (double v : *w.input_rpm) put_f64(out, v);
    }
    put_string(out, w.recording_id);
    put_le<std::uint64_t>(out, w.offset);
  }
}

std::vector<WindowPair> read_window_cache(std::istream& in, WindowGeometry* geom) {
  expect_magic(in, "HFWC");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kWindowCacheVersion) {
    throw_data("window cache: unsupported version " + std::to_string(version));
  }
  WindowGeometry g;
  g.in_len = get_le<std::uint32_t>(in, "in_len");
  g.out_len = get_le<std::uint32_t>(in, "out_len");
  const auto count = get_le<std::uint64_t>(in, "count");
  std::vector<WindowPair> out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t k = 0; k < count; ++k) {
    WindowPair w;
    const auto label = get_le<std::uint8_t>(in, "label");
    if (label > 2) throw_data("window cache: bad label byte " + std::to_string(label));
    w.label = static_cast<TrendLabel>(label);
    w.input.resize(g.in_len);
    w.target.resize(g.out_len);
    for (auto& v : w.input) v = get_f64(in, "pressure");
    for (auto& v : w.target) v = get_f64(in, "pressure");
    const auto has_rpm = get_le<std::uint8_t>(in, "rpm flag");
    if (has_rpm > 1) throw_data("window cache: bad rpm flag");
    if (has_rpm) {
      w.input_rpm.emplace(g.in_len);
      for (auto& v : *w.input_rpm) v = get_f64(in, "rpm");
    }
    w.recording_id = get_string(in, "recording id");
    w.offset = get_le<std::uint64_t>(in, "offset");
    out.push_back(std::move(w));
  }
  if (geom) *geom = g;
  return out;
}

void save_window_cache(const std::filesystem::path& path,
                       const std::vector<WindowPair>& windows,
                       const WindowGeometry& geom) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open for writing: " + path.string());
  write_window_cache(out, windows, geom);
  if (!out) throw_io("write failed: " + path.string());
}

std::vector<WindowPair> load_window_cache(const std::filesystem::path& path,
                                          WindowGeometry* geom) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open for reading: " + path.string());
  return read_window_cache(in, geom);
}

}  // namespace mapcast::signal
