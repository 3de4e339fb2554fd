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

// Recurrent cells and attention, expressed over tape variables so that every
// use is differentiable.

#include <vector>

#include "numeric/ops.hpp"

namespace mapcast::models {

using nc::Var;

/// LSTM weights bound to a tape. Gate layout along the 4n axis: i, f, g, o.
struct LstmVars {
  Var w;  // [features + hidden, 4*hidden]
  Var b;  // [4*hidden]
  std::size_t hidden = 0;
};

struct LstmState {
  Var h;  // [B, hidden]
  Var c;  // [B, hidden]
};

LstmState lstm_step(const LstmVars& cell, Var x, const LstmState& prev);

/// LMU weights bound to a tape; abar_t/bbar_t are constants holding the
/// transposed discrete system so that a row-batched memory update is
/// m_t = m_prev * abar_t + u_t * bbar_t.
struct LmuVars {
  Var e_x;  // [F,1]
  Var e_h;  // [n,1]
  Var e_m;  // [d,1]
  Var w_x;  // [F,n]
  Var w_h;  // [n,n]
  Var w_m;  // [d,n]
  Var abar_t;  // [d,d]
  Var bbar_t;  // [1,d]
};

struct LmuState {
  Var h;  // [B,n]
  Var m;  // [B,d]
};

/// u = x e_x + h e_h + m e_m;  m' = Abar m + Bbar u;  h' = tanh(x W_x + h W_h + m' W_m)
LmuState lmu_step(const LmuVars& cell, Var x, const LmuState& prev);

struct BidirectionalEncoding {
  std::vector<Var> states;  // per step [B, 2n]: forward half then backward half
  LstmState forward_final;  // after the last step
  LstmState backward_final; // after consuming step 0
};

/// Runs `fwd` over steps 0..T-1 and `bwd` over T-1..0 from zero states.
BidirectionalEncoding encode_bidirectional(const LstmVars& fwd, const LstmVars& bwd,
                                           const std::vector<Var>& inputs);

struct AttentionResult {
  Var context;  // [B, D]
  Var weights;  // [B, T]
};

/// Scaled dot-product attention of a projected decoder state over encoder
/// states. query_proj: [n, D]; decoder_state: [B, n]; encoder_states: [B, T, D].
AttentionResult attention_context(Var query_proj, Var decoder_state, Var encoder_states);

/// Stacks per-step [B, D] states into [B, T, D].
Var stack_steps(const std::vector<Var>& steps);

}  // namespace mapcast::models
