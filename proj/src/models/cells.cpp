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

#include "models/cells.hpp"

#include <cmath>

#include "common/error.hpp"

namespace mapcast::models {

using namespace nc;

LstmState lstm_step(const LstmVars& cell, Var x, const LstmState& prev) {
  const std::size_t n = cell.hidden;
  if (prev.h.shape().size() != 2 || prev.h.dim(1) != n || prev.c.shape() != prev.h.shape()) {
    throw_data("lstm_step: state shape " + shape_string(prev.h.shape()) +
               " does not match hidden size " + std::to_string(n));
  }
  const Var z = add(matmul(concat({x, prev.h}, 1), cell.w), cell.b);
  const Var i = sigmoid(slice(z, 1, 0, n));
  const Var f = sigmoid(slice(z, 1, n, 2 * n));
  const Var g = tanh(slice(z, 1, 2 * n, 3 * n));
  const Var o = sigmoid(slice(z, 1, 3 * n, 4 * n));
  LstmState next;
  next.c = add(mul(f, prev.c), mul(i, g));
  next.h = mul(o, tanh(next.c));
  return next;
}

LmuState lmu_step(const LmuVars& cell, Var x, const LmuState& prev) {
  const Var u = add(add(matmul(x, cell.e_x), matmul(prev.h, cell.e_h)), matmul(prev.m, cell.e_m));
  LmuState next;
  next.m = add(matmul(prev.m, cell.abar_t), matmul(u, cell.bbar_t));
  next.h = tanh(add(add(matmul(x, cell.w_x), matmul(prev.h, cell.w_h)), matmul(next.m, cell.w_m)));
  return next;
}

namespace {

LstmState zero_state(Tape& tape, std::size_t batch, std::size_t hidden) {
  return {tape.constant(Tensor({batch, hidden})), tape.constant(Tensor({batch, hidden}))};
}

}  // namespace

BidirectionalEncoding encode_bidirectional(const LstmVars& fwd, const LstmVars& bwd,
                                           const std::vector<Var>& inputs) {
  if (inputs.empty()) throw_data("encode_bidirectional: empty input sequence");
  Tape& tape = inputs.front().tape();
  const std::size_t batch = inputs.front().dim(0);
  const std::size_t steps = inputs.size();

  std::vector<Var> forward(steps), backward(steps);
  LstmState s = zero_state(tape, batch, fwd.hidden);
  for (std::size_t t = 0; t < steps; ++t) {
    s = lstm_step(fwd, inputs[t], s);
    forward[t] = s.h;
  }
  BidirectionalEncoding enc;
  enc.forward_final = s;
  s = zero_state(tape, batch, bwd.hidden);
  for (std::size_t t = steps; t-- > 0;) {
    s = lstm_step(bwd, inputs[t], s);
    backward[t] = s.h;
  }
  enc.backward_final = s;
  enc.states.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) enc.states.push_back(concat({forward[t], backward[t]}, 1));
  return enc;
}

Var stack_steps(const std::vector<Var>& steps) {
  if (steps.empty()) throw_data("stack_steps: no steps");
  const std::size_t batch = steps.front().dim(0);
  const std::size_t width = steps.front().dim(1);
  std::vector<Var> parts;
  parts.reserve(steps.size());
  for (const Var& s : steps) parts.push_back(reshape(s, {batch, 1, width}));
  return concat(std::span<const Var>(parts), 1);
}

AttentionResult attention_context(Var query_proj, Var decoder_state, Var encoder_states) {
  const Shape& es = encoder_states.shape();
  if (es.size() != 3 || decoder_state.shape().size() != 2 || es[0] != decoder_state.dim(0) ||
      query_proj.shape().size() != 2 || query_proj.dim(0) != decoder_state.dim(1) ||
      query_proj.dim(1) != es[2]) {
    throw_data("attention_context: incompatible shapes " + shape_string(decoder_state.shape()) +
               " and " + shape_string(es));
  }
  const std::size_t batch = es[0], steps = es[1], width = es[2];
  const Var q = reshape(matmul(decoder_state, query_proj), {batch, width, 1});
  const Var scores = scale(reshape(bmm(encoder_states, q), {batch, steps}),
                           1.0 / std::sqrt(static_cast<double>(width)));
  AttentionResult r;
  r.weights = softmax(scores, 1);
  r.context = reshape(bmm(reshape(r.weights, {batch, 1, steps}), encoder_states), {batch, width});
  return r;
}

}  // namespace mapcast::models
