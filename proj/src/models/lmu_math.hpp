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

// Continuous-time Legendre delay system and its discretization.

#include <span>
#include <utility>

#include "numeric/tensor.hpp"

namespace mapcast::models {

struct StateSpace {
  nc::Tensor a;  // [d,d]
  nc::Tensor b;  // [d]
};

/// A[i][j] = (2i+1)/theta * (-1 if i < j else (-1)^(i-j+1)),
/// B[i] = (2i+1)(-1)^i / theta, 0-based.
StateSpace lmu_matrices(std::size_t order, double theta);

enum class Discretization { Zoh, Euler };

/// Unit-step discretization. Zoh: Abar = expm(A), Bbar = A^-1 (Abar - I) B,
/// falling back to the integral of expm(As) B over [0,1] for singular A.
/// Euler: Abar = I + A, Bbar = B.
StateSpace discretize(const StateSpace& continuous, Discretization method);

/// Shifted Legendre polynomial P_i(2x - 1) on [0,1] by the three-term
/// recurrence.
double shifted_legendre(std::size_t degree, double x);

/// Estimate of the input r*theta steps ago from a memory state: sum_i P_i(2r-1) m_i.
double delay_reconstruct(std::span<const double> memory, double lag_fraction);

}  // namespace mapcast::models
