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

#include <vector>

#include "numeric/tape.hpp"

namespace mapcast::nc {

struct RmspropState {
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;
  std::vector<Tensor> accumulators;  // mean squared gradient, one per parameter

  /// Zero accumulators mirroring the parameter shapes.
  static RmspropState for_params(const ParameterSet& params, double learning_rate,
                                 double rho = 0.9, double epsilon = 1e-8);
};

/// acc <- rho*acc + (1-rho)*g^2;  p <- p - lr*g/sqrt(acc + eps)
void rmsprop_update(Tensor& param, const Tensor& grad, Tensor& acc, double learning_rate,
                    double rho, double epsilon);

/// Applies one update to every parameter using its accumulated grad.
void rmsprop_step(ParameterSet& params, RmspropState& state);

}  // namespace mapcast::nc
