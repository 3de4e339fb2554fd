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

// Differentiable primitives. Every function records one node on the tape that
// owns its inputs and throws a Data error naming the primitive and both shapes
// on a shape mismatch.

#include <span>
#include <vector>

#include "numeric/tape.hpp"

namespace mapcast::nc {

/// [M,K] x [K,N] -> [M,N]
Var matmul(Var a, Var b);
/// [B,M,K] x [B,K,N] -> [B,M,N]
Var bmm(Var a, Var b);

// Elementwise. `b` may also be a row vector ([N] or [1,N]) broadcast over the
// leading dimensions of `a`.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);

Var softmax(Var a, std::size_t axis);
Var concat(std::span<const Var> parts, std::size_t axis);
Var concat(std::initializer_list<Var> parts, std::size_t axis);
Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end);
Var transpose(Var a);
Var reshape(Var a, Shape shape);

/// Causal dilated 1-D convolution with left zero padding.
/// x [B,Cin,T], w [Cout,Cin,K], optional bias [Cout] -> [B,Cout,T];
/// out[b,o,t] = bias[o] + sum_c sum_k w[o,c,k] * x[b,c,t - (K-1-k)*dilation].
Var conv1d(Var x, Var w, Var bias, std::size_t dilation = 1);

Var sum(Var a);
/// mean((pred - target)^2) over all elements -> scalar.
Var mse_loss(Var pred, Var target);

}  // namespace mapcast::nc
