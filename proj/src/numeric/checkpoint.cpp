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

#include "numeric/checkpoint.hpp"

#include <fstream>

#include "common/binio.hpp"
#include "common/error.hpp"

namespace mapcast::nc {

using namespace binio;

void write_checkpoint(std::ostream& out, const ParameterSet& params) {
  put_magic(out, "HFCK");
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    put_string(out, p.name);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (double v : p.value.data()) put_f64(out, v);
  }
}

ParameterSet read_checkpoint(std::istream& in) {
  expect_magic(in, "HFCK");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw_data("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = get_le<std::uint32_t>(in, "count");
  ParameterSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = get_string(in, "parameter name");
    const auto rank = get_le<std::uint32_t>(in, "rank");
    if (rank > 8) throw_data("checkpoint: implausible rank for '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = get_le<std::uint32_t>(in, "dimension");
    if (shape_size(shape) > (1u << 26)) throw_data("checkpoint: implausible size for '" + name + "'");
    Tensor t(shape);
    for (auto& v : t.storage()) v = get_f64(in, "parameter data");
    params.add(std::move(name), std::move(t));
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open for writing: " + path.string());
  write_checkpoint(out, params);
  if (!out) throw_io("write failed: " + path.string());
}

ParameterSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open for reading: " + path.string());
  return read_checkpoint(in);
}

}  // namespace mapcast::nc
