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

// Little-endian binary primitives shared by the window cache and the
// parameter checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "common/error.hpp"

namespace mapcast::binio {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char buf[sizeof(T)];
  auto u = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(u & 0xFFu);
    u = static_cast<decltype(u)>(u >> 8);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

inline void put_f64(std::ostream& out, double v) {
  put_le(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_string(std::ostream& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_magic(std::ostream& out, const char (&magic)[5]) {
  out.write(magic, 4);
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw_data(std::string("truncated file while reading ") + what);
  }
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) {
    u = static_cast<decltype(u)>((u << 8) | buf[i]);
  }
  return static_cast<T>(u);
}

inline double get_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in, what));
}

inline std::string get_string(std::istream& in, const char* what,
                              std::uint32_t max_len = 1u << 20) {
  const auto n = get_le<std::uint32_t>(in, what);
  if (n > max_len) throw_data(std::string("implausible string length for ") + what);
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) {
    throw_data(std::string("truncated file while reading ") + what);
  }
  return s;
}

inline void expect_magic(std::istream& in, const char (&magic)[5]) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw_data(std::string("bad magic, expected '") + magic + "'");
  }
}

}  // namespace mapcast::binio
