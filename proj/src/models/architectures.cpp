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

#include "models/architectures.hpp"

#include "common/error.hpp"

namespace mapcast::models {

using namespace nc;

namespace {

Var linear(Var x, Var w, Var b) { return add(matmul(x, w), b); }

Tensor column_block(const Tensor& m, std::size_t begin, std::size_t end) {
  Tensor out({m.dim(0), end - begin});
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    for (std::size_t j = begin; j < end; ++j) out.at(i, j - begin) = m.at(i, j);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// DNN

DnnModel::DnnModel(ModelConfig config) : Model(std::move(config)) {
  std::size_t width = config_.in_len * config_.features();
  const auto& hidden = config_.dnn_hidden;
  for (std::size_t l = 0; l <= hidden.size(); ++l) {
    const std::size_t out = l < hidden.size() ? hidden[l] : 1;
    const auto name = "dnn.layer" + std::to_string(l);
    // relu layers get the He gain; the output layer stays plain
    const double gain = l < hidden.size() ? std::sqrt(6.0) : 1.0;
    params_.add(name + ".w", init(name + ".w", {width, out}, InitScheme::UniformFanIn, 0, gain));
    params_.add(name + ".b", init(name + ".b", {out}, InitScheme::Zeros));
    width = out;
  }
}

DnnModel::Bound DnnModel::bind(Tape& tape) {
  Bound net;
  for (std::size_t i = 0; i < params_.size(); i += 2) {
    net.weights.push_back(tape.param(params_[i]));
    net.biases.push_back(tape.param(params_[i + 1]));
  }
  return net;
}

Var DnnModel::single_step(const Bound& net, Var features) const {
  Var h = features;
  const std::size_t last = net.weights.size() - 1;
  for (std::size_t l = 0; l < last; ++l) h = relu(linear(h, net.weights[l], net.biases[l]));
  return linear(h, net.weights[last], net.biases[last]);
}

Var DnnModel::forward(Tape& tape, const Batch& batch, const ForwardOptions&) {
  check_batch(batch);
  const std::size_t in = config_.in_len;
  const Bound net = bind(tape);
  Var buffer = tape.constant(batch.inputs);
  Var rpm;
  if (config_.use_rpm) rpm = tape.constant(*batch.input_rpm);
  std::vector<Var> outputs;
  outputs.reserve(config_.out_len);
  for (std::size_t s = 0; s < config_.out_len; ++s) {
    const Var features = config_.use_rpm ? concat({buffer, rpm}, 1) : buffer;
    const Var y = single_step(net, features);
    check_finite(y.value(), "dnn", s);
    outputs.push_back(y);
    buffer = in > 1 ? concat({slice(buffer, 1, 1, in), y}, 1) : y;
    // future motor speed is unknown; hold the last observed value
    if (config_.use_rpm && in > 1) rpm = concat({slice(rpm, 1, 1, in), slice(rpm, 1, in - 1, in)}, 1);
  }
  return concat(std::span<const Var>(outputs), 1);
}

// ---------------------------------------------------------------------------
// Seq2Seq

Seq2SeqModel::Seq2SeqModel(ModelConfig config, bool attention)
    : Model(std::move(config)), attention_(attention) {
  const std::size_t n = config_.rnn_hidden;
  const std::size_t f = config_.features();
  auto lstm = [&](const std::string& prefix, std::size_t inputs) {
    params_.add(prefix + ".w", init(prefix + ".w", {inputs + n, 4 * n}, InitScheme::UniformFanIn, n));
    Tensor b({4 * n});
    for (std::size_t i = n; i < 2 * n; ++i) b[i] = 1.0;  // forget gate
    params_.add(prefix + ".b", std::move(b));
  };
  lstm("enc_fwd", f);
  lstm("enc_bwd", f);
  params_.add("bridge_h.w", init("bridge_h.w", {2 * n, n}, InitScheme::UniformFanIn));
  params_.add("bridge_h.b", Tensor({n}));
  params_.add("bridge_c.w", init("bridge_c.w", {2 * n, n}, InitScheme::UniformFanIn));
  params_.add("bridge_c.b", Tensor({n}));
  lstm("dec", attention_ ? 1 + 2 * n : 1);
  if (attention_) params_.add("attn.query", init("attn.query", {n, 2 * n}, InitScheme::UniformFanIn));
  // the head also sees the value fed to the decoder at this step
  const std::size_t head_in = (attention_ ? 3 * n : n) + 1;
  params_.add("head.w", init("head.w", {head_in, 1}, InitScheme::UniformFanIn));
  params_.add("head.b", Tensor({1}));
}

LstmVars Seq2SeqModel::bind_lstm(Tape& tape, const std::string& prefix) {
  return {tape.param(params_.at(prefix + ".w")), tape.param(params_.at(prefix + ".b")),
          config_.rnn_hidden};
}

Var Seq2SeqModel::forward(Tape& tape, const Batch& batch, const ForwardOptions& opts) {
  check_batch(batch);
  const std::size_t in = config_.in_len;

  std::vector<Var> inputs;
  inputs.reserve(in);
  for (std::size_t t = 0; t < in; ++t) inputs.push_back(step_input(tape, batch, t));

  const LstmVars fwd = bind_lstm(tape, "enc_fwd");
  const LstmVars bwd = bind_lstm(tape, "enc_bwd");
  const BidirectionalEncoding enc = encode_bidirectional(fwd, bwd, inputs);
  check_finite(enc.forward_final.h.value(), "seq2seq encoder", in - 1);
  check_finite(enc.backward_final.h.value(), "seq2seq encoder", 0);

  LstmState state;
  state.h = tanh(linear(concat({enc.forward_final.h, enc.backward_final.h}, 1),
                        tape.param(params_.at("bridge_h.w")), tape.param(params_.at("bridge_h.b"))));
  state.c = linear(concat({enc.forward_final.c, enc.backward_final.c}, 1),
                   tape.param(params_.at("bridge_c.w")), tape.param(params_.at("bridge_c.b")));

  const LstmVars dec = bind_lstm(tape, "dec");
  const Var head_w = tape.param(params_.at("head.w"));
  const Var head_b = tape.param(params_.at("head.b"));
  Var query, memory;
  if (attention_) {
    query = tape.param(params_.at("attn.query"));
    memory = stack_steps(enc.states);
  }

  const bool forcing = opts.teacher_forcing > 0.0 && batch.targets.has_value();
  if (forcing && opts.rng == nullptr) throw_usage("teacher forcing needs a random generator");

  Var previous = tape.constant(column_block(batch.inputs, in - 1, in));
  std::vector<Var> outputs;
  outputs.reserve(config_.out_len);
  for (std::size_t t = 0; t < config_.out_len; ++t) {
    Var x = previous;
    Var context;
    if (attention_) {
      context = attention_context(query, state.h, memory).context;
      x = concat({previous, context}, 1);
    }
    state = lstm_step(dec, x, state);
    check_finite(state.h.value(), "seq2seq decoder", t);
    const Var head_in = attention_ ? concat({state.h, context, previous}, 1)
                                   : concat({state.h, previous}, 1);
    const Var y = linear(head_in, head_w, head_b);
    outputs.push_back(y);
    if (forcing && opts.rng->uniform() < opts.teacher_forcing) {
      previous = tape.constant(column_block(*batch.targets, t, t + 1));
    } else {
      previous = y;
    }
  }
  return concat(std::span<const Var>(outputs), 1);
}

std::vector<Tensor> Seq2SeqModel::step_features(const Batch& batch) {
  check_batch(batch);
  Tape tape;
  const LstmVars fwd = bind_lstm(tape, "enc_fwd");
  LstmState s{tape.constant(Tensor({batch.size(), config_.rnn_hidden})),
              tape.constant(Tensor({batch.size(), config_.rnn_hidden}))};
  std::vector<Tensor> out;
  for (std::size_t t = 0; t < config_.in_len; ++t) {
    s = lstm_step(fwd, step_input(tape, batch, t), s);
    out.push_back(s.h.value());
  }
  return out;
}

// ---------------------------------------------------------------------------
// LMU

LmuModel::LmuModel(ModelConfig config) : Model(std::move(config)) {
  const std::size_t f = config_.features();
  const std::size_t n = config_.lmu_hidden;
  const std::size_t d = config_.lmu_order;
  discrete_ = discretize(lmu_matrices(d, config_.lmu_theta), config_.lmu_discretization);
  params_.add("lmu.e_x", init("lmu.e_x", {f, 1}, InitScheme::UniformFanIn));
  params_.add("lmu.e_h", init("lmu.e_h", {n, 1}, InitScheme::UniformFanIn));
  params_.add("lmu.e_m", init("lmu.e_m", {d, 1}, InitScheme::Zeros));
  params_.add("lmu.w_x", init("lmu.w_x", {f, n}, InitScheme::UniformFanIn));
  params_.add("lmu.w_h", init("lmu.w_h", {n, n}, InitScheme::Orthogonal));
  params_.add("lmu.w_m", init("lmu.w_m", {d, n}, InitScheme::UniformFanIn));
  params_.add("head.w", init("head.w", {n + d, config_.out_len}, InitScheme::UniformFanIn));
  params_.add("head.b", Tensor({config_.out_len}));
}

LmuVars LmuModel::bind(Tape& tape) {
  LmuVars v;
  v.e_x = tape.param(params_.at("lmu.e_x"));
  v.e_h = tape.param(params_.at("lmu.e_h"));
  v.e_m = tape.param(params_.at("lmu.e_m"));
  v.w_x = tape.param(params_.at("lmu.w_x"));
  v.w_h = tape.param(params_.at("lmu.w_h"));
  v.w_m = tape.param(params_.at("lmu.w_m"));
  v.abar_t = tape.constant(transpose_plain(discrete_.a));
  v.bbar_t = tape.constant(discrete_.b.reshaped({1, discrete_.b.size()}));
  return v;
}

std::vector<LmuState> LmuModel::encode(Tape& tape, const LmuVars& cell, const Batch& batch) {
  LmuState s{tape.constant(Tensor({batch.size(), config_.lmu_hidden})),
             tape.constant(Tensor({batch.size(), config_.lmu_order}))};
  std::vector<LmuState> states;
  states.reserve(config_.in_len);
  for (std::size_t t = 0; t < config_.in_len; ++t) {
    s = lmu_step(cell, step_input(tape, batch, t), s);
    check_finite(s.h.value(), "lmu", t);
    states.push_back(s);
  }
  return states;
}

Var LmuModel::forward(Tape& tape, const Batch& batch, const ForwardOptions&) {
  check_batch(batch);
  const LmuVars cell = bind(tape);
  const LmuState last = encode(tape, cell, batch).back();
  return linear(concat({last.h, last.m}, 1), tape.param(params_.at("head.w")),
                tape.param(params_.at("head.b")));
}

std::vector<Tensor> LmuModel::step_features(const Batch& batch) {
  check_batch(batch);
  Tape tape;
  const LmuVars cell = bind(tape);
  std::vector<Tensor> out;
  for (const auto& s : encode(tape, cell, batch)) out.push_back(concat({s.h, s.m}, 1).value());
  return out;
}

// ---------------------------------------------------------------------------
// TCN

TcnModel::TcnModel(ModelConfig config) : Model(std::move(config)) {
  const std::size_t c = config_.tcn_channels;
  const std::size_t k = config_.tcn_kernel;
  std::size_t cin = config_.features();
  for (std::size_t i = 0; i < config_.tcn_dilations.size(); ++i) {
    const auto name = "tcn.block" + std::to_string(i);
    params_.add(name + ".w", init(name + ".w", {c, cin, k}, InitScheme::UniformFanIn));
    params_.add(name + ".b", Tensor({c}));
    if (cin != c) {
      params_.add(name + ".res", init(name + ".res", {c, cin, 1}, InitScheme::UniformFanIn));
    }
    cin = c;
  }
  const std::size_t flat = c * config_.in_len;
  params_.add("dense0.w", init("dense0.w", {flat, config_.tcn_dense}, InitScheme::UniformFanIn));
  params_.add("dense0.b", Tensor({config_.tcn_dense}));
  params_.add("dense1.w",
              init("dense1.w", {config_.tcn_dense, config_.out_len}, InitScheme::UniformFanIn));
  params_.add("dense1.b", Tensor({config_.out_len}));
}

Var TcnModel::features(Tape& tape, const Batch& batch) {
  const std::size_t b = batch.size();
  const std::size_t f = config_.features();
  const std::size_t len = config_.in_len;
  Tensor x({b, f, len});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t t = 0; t < len; ++t) {
      x[(i * f) * len + t] = batch.inputs.at(i, t);
      if (f == 2) x[(i * f + 1) * len + t] = batch.input_rpm->at(i, t);
    }
  }
  Var h = tape.constant(std::move(x));
  for (std::size_t i = 0; i < config_.tcn_dilations.size(); ++i) {
    const auto name = "tcn.block" + std::to_string(i);
    const Var y = relu(conv1d(h, tape.param(params_.at(name + ".w")),
                              tape.param(params_.at(name + ".b")), config_.tcn_dilations[i]));
    Var residual = h;
    if (auto* res = params_.find(name + ".res")) residual = conv1d(h, tape.param(*res), Var{}, 1);
    h = add(y, residual);
    check_finite(h.value(), "tcn block", i);
  }
  return h;
}

Var TcnModel::forward(Tape& tape, const Batch& batch, const ForwardOptions&) {
  check_batch(batch);
  const Var h = features(tape, batch);
  const Var flat = reshape(h, {batch.size(), config_.tcn_channels * config_.in_len});
  const Var hidden = relu(linear(flat, tape.param(params_.at("dense0.w")),
                                 tape.param(params_.at("dense0.b"))));
  return linear(hidden, tape.param(params_.at("dense1.w")), tape.param(params_.at("dense1.b")));
}

std::vector<Tensor> TcnModel::step_features(const Batch& batch) {
  check_batch(batch);
  Tape tape;
  const Tensor h = features(tape, batch).value();
  const std::size_t b = batch.size(), c = config_.tcn_channels, len = config_.in_len;
  std::vector<Tensor> out;
  for (std::size_t t = 0; t < len; ++t) {
    Tensor step({b, c});
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) step.at(i, ch) = h[(i * c + ch) * len + t];
    }
    out.push_back(std::move(step));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference models

Var PersistenceModel::forward(Tape& tape, const Batch& batch, const ForwardOptions&) {
  check_batch(batch);
  Tensor out({batch.size(), config_.out_len});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double last = batch.inputs.at(i, config_.in_len - 1);
    for (std::size_t t = 0; t < config_.out_len; ++t) out.at(i, t) = last;
  }
  return tape.constant(std::move(out));
}

Var OracleModel::forward(Tape& tape, const Batch& batch, const ForwardOptions&) {
  check_batch(batch);
  if (!batch.targets) throw_data("oracle model needs targets");
  return tape.constant(*batch.targets);
}

}  // namespace mapcast::models
