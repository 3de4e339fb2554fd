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

#include "models/cells.hpp"
#include "models/model.hpp"

namespace mapcast::models {

/// Feed-forward one-step-ahead network applied recursively over the horizon.
class DnnModel final : public Model {
 public:
  explicit DnnModel(ModelConfig config);

  struct Bound {
    std::vector<Var> weights;
    std::vector<Var> biases;
  };
  Bound bind(nc::Tape& tape);
  /// One step ahead from a [B, in_len * F] feature row -> [B, 1].
  Var single_step(const Bound& net, Var features) const;

  Var forward(nc::Tape& tape, const Batch& batch, const ForwardOptions& opts = {}) override;
};

/// Bidirectional LSTM encoder with an LSTM decoder, optionally attending over
/// the encoder states at every decoder step.
class Seq2SeqModel final : public Model {
 public:
  Seq2SeqModel(ModelConfig config, bool attention);

  Var forward(nc::Tape& tape, const Batch& batch, const ForwardOptions& opts = {}) override;
  std::vector<nc::Tensor> step_features(const Batch& batch) override;

 private:
  LstmVars bind_lstm(nc::Tape& tape, const std::string& prefix);
  bool attention_;
};

/// LMU recurrent layer over the input window followed by a dense head that
/// emits the whole horizon at once.
class LmuModel final : public Model {
 public:
  explicit LmuModel(ModelConfig config);

  LmuVars bind(nc::Tape& tape);
  Var forward(nc::Tape& tape, const Batch& batch, const ForwardOptions& opts = {}) override;
  std::vector<nc::Tensor> step_features(const Batch& batch) override;

  const StateSpace& discrete_system() const { return discrete_; }

 private:
  std::vector<LmuState> encode(nc::Tape& tape, const LmuVars& cell, const Batch& batch);

  StateSpace discrete_;
};

/// Causal dilated convolution blocks, flatten, dense layers.
class TcnModel final : public Model {
 public:
  explicit TcnModel(ModelConfig config);

  Var forward(nc::Tape& tape, const Batch& batch, const ForwardOptions& opts = {}) override;
  std::vector<nc::Tensor> step_features(const Batch& batch) override;

 private:
  Var features(nc::Tape& tape, const Batch& batch);
};

class PersistenceModel final : public Model {
 public:
  explicit PersistenceModel(ModelConfig config) : Model(std::move(config)) {}
  Var forward(nc::Tape& tape, const Batch& batch, const ForwardOptions& opts = {}) override;
};

class OracleModel final : public Model {
 public:
  explicit OracleModel(ModelConfig config) : Model(std::move(config)) {}
  Var forward(nc::Tape& tape, const Batch& batch, const ForwardOptions& opts = {}) override;
};

}  // namespace mapcast::models
