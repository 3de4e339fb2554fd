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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/kv.hpp"
#include "common/rng.hpp"
#include "models/lmu_math.hpp"
#include "numeric/linalg.hpp"
#include "numeric/tape.hpp"

namespace mapcast::models {

enum class Architecture {
  Dnn,
  Seq2Seq,
  Seq2SeqAttn,
  LmuRnn,
  Tcn,
  // parameter-free reference models
  Persistence,
  Oracle,  // debug: echoes the target; only usable when targets are supplied
  // registered for later implementation
  Transformer,
  Pyramid,
};

std::string architecture_name(Architecture a);
Architecture parse_architecture(std::string_view name);
bool is_implemented(Architecture a);

struct ModelConfig {
  Architecture architecture = Architecture::LmuRnn;
  bool use_rpm = false;
  std::size_t in_len = 30;
  std::size_t out_len = 30;

  std::vector<std::size_t> dnn_hidden = {128, 128, 128};
  std::size_t rnn_hidden = 64;  // per direction
  std::size_t lmu_order = 32;
  double lmu_theta = 30.0;
  std::size_t lmu_hidden = 64;
  Discretization lmu_discretization = Discretization::Zoh;
  std::size_t tcn_channels = 32;
  std::size_t tcn_kernel = 3;
  std::vector<std::size_t> tcn_dilations = {1, 2, 4, 8};
  std::size_t tcn_dense = 64;
  double teacher_forcing = 0.5;  // training only
  std::uint64_t seed = 0;

  std::size_t features() const { return use_rpm ? 2 : 1; }
  void validate() const;

  void write(KvDocument& doc, const std::string& prefix = "model.") const;
  /// Reads keys with the given prefix; absent keys keep their defaults.
  static ModelConfig read(const KvDocument& doc, const std::string& prefix = "model.");
  /// Keys recognised by read(), without prefix.
  static const std::vector<std::string>& keys();
};

/// A normalized mini-batch. Row b of each matrix is one window.
struct Batch {
  nc::Tensor inputs;                    // [B, in_len]
  std::optional<nc::Tensor> input_rpm;  // [B, in_len]
  std::optional<nc::Tensor> targets;    // [B, out_len]

  std::size_t size() const { return inputs.rank() ? inputs.dim(0) : 0; }
};

struct ForwardOptions {
  double teacher_forcing = 0.0;  // probability of feeding the true previous target
  Rng* rng = nullptr;            // required when teacher_forcing > 0
};

class Model {
 public:
  explicit Model(ModelConfig config) : config_(std::move(config)) {}
  virtual ~Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  nc::ParameterSet& params() { return params_; }
  const nc::ParameterSet& params() const { return params_; }

  /// Predictions [B, out_len] in normalized units.
  virtual nc::Var forward(nc::Tape& tape, const Batch& batch, const ForwardOptions& opts = {}) = 0;

  /// Per-input-step representations, one [B, *] tensor per step, for models
  /// whose intermediate states are attributable to input steps.
  virtual std::vector<nc::Tensor> step_features(const Batch& batch);

  /// Inference convenience: forward on a fresh tape.
  nc::Tensor predict(const Batch& batch);

 protected:
  void check_batch(const Batch& batch) const;
  /// Input features for step t: [B, F].
  nc::Var step_input(nc::Tape& tape, const Batch& batch, std::size_t t) const;
  nc::Tensor init(const std::string& name, const nc::Shape& shape, nc::InitScheme scheme,
                  std::size_t fan_in = 0, double gain = 1.0) const;

  ModelConfig config_;
  nc::ParameterSet params_;
};

std::unique_ptr<Model> make_model(const ModelConfig& config);

/// Throws Numeric naming the step if any value is not finite.
void check_finite(const nc::Tensor& t, const char* where, std::size_t step);

}  // namespace mapcast::models
