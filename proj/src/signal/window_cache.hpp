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

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "signal/signal.hpp"

namespace mapcast::signal {

inline constexpr std::uint32_t kWindowCacheVersion = 1;

/// `HFWC` little-endian window cache.
void write_window_cache(std::ostream& out, const std::vector<WindowPair>& windows,
                        const WindowGeometry& geom);
std::vector<WindowPair> read_window_cache(std::istream& in, WindowGeometry* geom = nullptr);

void save_window_cache(const std::filesystem::path& path,
                       const std::vector<WindowPair>& windows,
                       const WindowGeometry& geom);
std::vector<WindowPair> load_window_cache(const std::filesystem::path& path,
                                          WindowGeometry* geom = nullptr);

}  // namespace mapcast::signal
