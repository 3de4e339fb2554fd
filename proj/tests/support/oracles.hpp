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

// Independent reference implementations used by the unit tests and by the
// acceptance runner. They are deliberately naive: plain loops, no shared code
// with the library beyond the data types.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "common/rng.hpp"
#include "numeric/tensor.hpp"
#include "signal/signal.hpp"

namespace mapcast::testing {

inline std::vector<double> naive_block_means(const std::vector<double>& rt, std::size_t block) {
  std::vector<double> out;
  for (std::size_t k = 0; (k + 1) * block <= rt.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < block; ++i) s += rt[k * block + i];
    out.push_back(s / static_cast<double>(block));
  }
  return out;
}

/// Counts offsets o = 0, stride, 2*stride, ... with o + span <= length.
inline std::size_t enumerate_window_offsets(std::size_t length, std::size_t span,
                                            std::size_t stride) {
  std::size_t n = 0;
  for (std::size_t o = 0; o + span <= length; o += stride) ++n;
  return n;
}

inline signal::TrendLabel brute_net_label(const std::vector<double>& v, double threshold) {
  const double delta = v.back() - v.front();
  if (delta >= threshold) return signal::TrendLabel::Increasing;
  if (delta <= -threshold) return signal::TrendLabel::Decreasing;
  return signal::TrendLabel::Stationary;
}

inline std::vector<std::pair<std::size_t, std::size_t>> naive_alert_scan(
    const std::vector<double>& v, double threshold) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool below = v[i] < threshold;
    const bool prev_below = i > 0 && v[i - 1] < threshold;
    if (below && !prev_below) out.push_back({i, i});
    if (below) out.back().second = i;
  }
  return out;
}

inline double naive_rmse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

/// Truncated Taylor series sum_{k<terms} A^k / k!.
inline nc::Tensor taylor_expm(const nc::Tensor& a, int terms = 30) {
  const std::size_t n = a.dim(0);
  nc::Tensor result = nc::Tensor::identity(n);
  nc::Tensor term = nc::Tensor::identity(n);
  for (int k = 1; k < terms; ++k) {
    nc::Tensor next({n, n});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l) s += term.at(i, l) * a.at(l, j);
        next.at(i, j) = s / k;
      }
    term = next;
    for (std::size_t i = 0; i < n * n; ++i) result[i] += term[i];
  }
  return result;
}

/// Exact rational closed form of the Legendre delay system scaled by theta:
/// theta*A[i][j] = (2i+1) * (-1 if i < j else (-1)^(i-j+1)), theta*B[i] = (2i+1)(-1)^i.
inline long long lmu_a_scaled(long long i, long long j) {
  const long long sign = i < j ? -1 : (((i - j + 1) % 2 == 0) ? 1 : -1);
  return (2 * i + 1) * sign;
}
inline long long lmu_b_scaled(long long i) { return (2 * i + 1) * (i % 2 == 0 ? 1 : -1); }

/// Noise with a flat spectrum up to `cutoff` cycles per step: a sum of
/// random-phase sinusoids on a fine frequency grid, normalized to unit RMS.
inline std::vector<double> band_limited_noise(std::size_t length, double cutoff, Rng& rng,
                                              std::size_t components = 200) {
  std::vector<double> freq(components), phase(components);
  for (std::size_t k = 0; k < components; ++k) {
    freq[k] = cutoff * (static_cast<double>(k) + rng.uniform()) / static_cast<double>(components);
    phase[k] = 2.0 * std::numbers::pi * rng.uniform();
  }
  std::vector<double> u(length, 0.0);
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t k = 0; k < components; ++k)
      u[t] += std::cos(2.0 * std::numbers::pi * freq[k] * static_cast<double>(t) + phase[k]);
  double ss = 0.0;
  for (double x : u) ss += x * x;
  const double rms = std::sqrt(ss / static_cast<double>(length));
  for (double& x : u) x /= rms;
  return u;
}

/// Drives m_{t+1} = Abar m_t + Bbar u_t with plain loops and returns every
/// state after its update.
inline std::vector<std::vector<double>> simulate_memory(const nc::Tensor& abar,
                                                        const nc::Tensor& bbar,
                                                        const std::vector<double>& u) {
  const std::size_t d = abar.dim(0);
  std::vector<double> m(d, 0.0);
  std::vector<std::vector<double>> states;
  for (double ut : u) {
    std::vector<double> next(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) next[i] += abar.at(i, j) * m[j];
      next[i] += bbar[i] * ut;
    }
    m = next;
    states.push_back(m);
  }
  return states;
}

}  // namespace mapcast::testing
