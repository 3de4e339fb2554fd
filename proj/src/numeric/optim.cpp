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

#include "numeric/optim.hpp"

#include <cmath>

#include "common/error.hpp"

namespace mapcast::nc {

RmspropState RmspropState::for_params(const ParameterSet& params, double learning_rate,
                                      double rho, double epsilon) {
  RmspropState s;
  s.learning_rate = learning_rate;
  s.rho = rho;
  s.epsilon = epsilon;
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.accumulators.emplace_back(params[i].value.shape());
  }
  return s;
}

void rmsprop_update(Tensor& param, const Tensor& grad, Tensor& acc, double learning_rate,
                    double rho, double epsilon) {
  if (param.shape() != grad.shape() || param.shape() != acc.shape()) {
    throw_data("rmsprop_step: shape mismatch between parameter " +
               shape_string(param.shape()) + ", gradient " + shape_string(grad.shape()) +
               " and accumulator " + shape_string(acc.shape()));
  }
  auto p = param.data();
  auto g = grad.data();
  auto a = acc.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    a[i] = rho * a[i] + (1.0 - rho) * g[i] * g[i];
    p[i] -= learning_rate * g[i] / std::sqrt(a[i] + epsilon);
  }
}

void rmsprop_step(ParameterSet& params, RmspropState& state) {
  if (state.accumulators.size() != params.size()) {
    throw_data("rmsprop_step: state holds " + std::to_string(state.accumulators.size()) +
               " accumulators for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    rmsprop_update(params[i].value, params[i].grad, state.accumulators[i], state.learning_rate,
                   state.rho, state.epsilon);
  }
}

}  // namespace mapcast::nc
