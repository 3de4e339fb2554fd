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

#include "numeric/tensor.hpp"

namespace mapcast::nc {

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
Tensor expm(const Tensor& a);

/// Solves a x = b for square a (b may have several columns). Returns false if
/// a is numerically singular.
bool try_solve(const Tensor& a, const Tensor& b, Tensor& x);

enum class InitScheme { UniformFanIn, Orthogonal, Zeros };

/// Deterministic initialization. UniformFanIn draws from +-gain*sqrt(1/fan_in);
/// fan_in defaults to dim(0) for rank <= 2 and to dim(1)*dim(2) for rank 3.
Tensor seeded_init(const Shape& shape, InitScheme scheme, std::uint64_t seed,
                   std::size_t fan_in = 0, double gain = 1.0);

}  // namespace mapcast::nc
