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

#include "models/lmu_math.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/kv.hpp"
#include "numeric/linalg.hpp"

namespace mapcast::models {

using nc::Tensor;

StateSpace lmu_matrices(std::size_t order, double theta) {
  if (order == 0) throw_usage("lmu_matrices: order must be >= 1");
  if (!(theta > 0.0)) throw_usage("lmu_matrices: theta must be > 0");
  StateSpace ss{Tensor({order, order}), Tensor({order})};
  for (std::size_t i = 0; i < order; ++i) {
    const double scale = static_cast<double>(2 * i + 1) / theta;
    ss.b[i] = (i % 2 == 0 ? 1.0 : -1.0) * scale;
    for (std::size_t j = 0; j < order; ++j) {
      double sign = -1.0;
      if (i >= j) sign = ((i - j + 1) % 2 == 0) ? 1.0 : -1.0;
      ss.a.at(i, j) = sign * scale;
    }
  }
  return ss;
}

StateSpace discretize(const StateSpace& continuous, Discretization method) {
  const Tensor& a = continuous.a;
  if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
    throw_data("discretize: A must be square, got " + nc::shape_string(a.shape()));
  }
  const std::size_t d = a.dim(0);
  if (continuous.b.size() != d) {
    throw_data("discretize: B has " + std::to_string(continuous.b.size()) +
               " entries for a " + std::to_string(d) + "-state system");
  }
  if (method == Discretization::Euler) {
    StateSpace out{a, Tensor({d}, std::vector<double>(continuous.b.data().begin(),
                                                      continuous.b.data().end()))};
    for (std::size_t i = 0; i < d; ++i) out.a.at(i, i) += 1.0;
    return out;
  }

  StateSpace out;
  out.a = nc::expm(a);
  Tensor rhs({d, 1});
  {
    // (Abar - I) B
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        s += (out.a.at(i, j) - (i == j ? 1.0 : 0.0)) * continuous.b[j];
      }
      rhs.at(i, 0) = s;
    }
  }
  Tensor x;
  if (nc::try_solve(a, rhs, x)) {
    out.b = x.reshaped({d});
    return out;
  }
  // Singular A: the block exponential expm([[A, B], [0, 0]]) carries
  // the integral of expm(As) B over [0,1] in its top-right column.
  Tensor aug({d + 1, d + 1});
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) aug.at(i, j) = a.at(i, j);
    aug.at(i, d) = continuous.b[i];
  }
  const Tensor e = nc::expm(aug);
  out.b = Tensor({d});
  for (std::size_t i = 0; i < d; ++i) out.b[i] = e.at(i, d);
  return out;
}

double shifted_legendre(std::size_t degree, double x) {
  const double y = 2.0 * x - 1.0;
  double prev = 1.0;
  if (degree == 0) return prev;
  double cur = y;
  for (std::size_t i = 1; i < degree; ++i) {
    const double next = (static_cast<double>(2 * i + 1) * y * cur - static_cast<double>(i) * prev) /
                        static_cast<double>(i + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

double delay_reconstruct(std::span<const double> memory, double lag_fraction) {
  if (!(lag_fraction >= 0.0 && lag_fraction <= 1.0)) {
    throw_data("delay_reconstruct: lag fraction " + format_double(lag_fraction) +
               " outside [0, 1]");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < memory.size(); ++i) {
    s += shifted_legendre(i, lag_fraction) * memory[i];
  }
  return s;
}

}  // namespace mapcast::models
