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

// Training, evaluation and reporting over prepared window datasets.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/kv.hpp"
#include "models/model.hpp"
#include "signal/signal.hpp"

namespace mapcast::bench {

using signal::WindowPair;

/// Affine z-score map fitted on training windows only.
struct Normalizer {
  double mean = 0.0;
  double sd = 1.0;
  double apply(double x) const { return (x - mean) / sd; }
  double invert(double z) const { return z * sd + mean; }
};

struct Normalization {
  Normalizer pressure;
  std::optional<Normalizer> rpm;

  void write(KvDocument& doc, const std::string& prefix = "norm.") const;
  static Normalization read(const KvDocument& doc, const std::string& prefix = "norm.");
};

/// Pressure statistics over every input and target value; rpm statistics over
/// input rpm when present. Throws Data on an empty set or zero pressure
/// variance. A constant rpm channel gets sd 1.
Normalization normalize_fit(std::span<const WindowPair> train);

/// Normalized batch of the selected windows, targets included when asked.
models::Batch make_batch(std::span<const WindowPair> windows,
                         std::span<const std::size_t> rows, const Normalization& norm,
                         bool use_rpm, bool with_targets);

enum class DecayPolicy { Plateau, PerEpoch, None };
std::string decay_policy_name(DecayPolicy p);
DecayPolicy parse_decay_policy(std::string_view s);

struct TrainConfig {
  double learning_rate = 1e-3;
  double decay_factor = 0.8;
  DecayPolicy decay_policy = DecayPolicy::Plateau;
  std::size_t plateau_patience = 2;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 30;
  std::size_t early_stop_patience = 10;
  std::size_t max_steps = 0;  // 0 = no limit
  double rho = 0.9;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  void write(KvDocument& doc, const std::string& prefix = "train.") const;
  static TrainConfig read(const KvDocument& doc, const std::string& prefix = "train.");
  static const std::vector<std::string>& keys();
};

struct EpochRecord {
  std::size_t epoch = 0;         // 1-based
  double train_loss = 0.0;       // mean normalized MSE over the epoch's batches
  std::optional<double> holdout_loss;
  double lr = 0.0;               // learning rate used during the epoch
};

struct History {
  std::vector<EpochRecord> epochs;
  std::size_t steps = 0;
  std::size_t best_epoch = 0;  // 0 = initial parameters
};

/// Trains in place with RMSprop on normalized MSE and leaves the model holding
/// the parameters with the lowest holdout loss (training loss when the
/// holdout is empty). Throws Numeric naming epoch and batch on a non-finite
/// loss.
History train(models::Model& model, std::span<const WindowPair> train_set,
              std::span<const WindowPair> holdout_set, const Normalization& norm,
              const TrainConfig& config);

/// Normalized MSE of inference predictions over a window set.
double normalized_loss(models::Model& model, std::span<const WindowPair> windows,
                       const Normalization& norm);

double rmse(std::span<const double> pred, std::span<const double> target);

/// Repeats the last input value over the horizon.
std::vector<double> persistence_baseline(std::span<const double> input,
                                         std::size_t horizon = signal::kOutLen);

enum class Category { I = 0, D = 1, S = 2, IDS = 3 };
inline constexpr std::array<Category, 4> kCategories = {Category::I, Category::D, Category::S,
                                                        Category::IDS};
const char* category_name(Category c);

struct CategoryResult {
  double rmse = 0.0;  // mmHg
  std::size_t windows = 0;
};

struct WindowPrediction {
  std::string recording_id;
  std::uint64_t offset = 0;
  signal::TrendLabel label = signal::TrendLabel::Stationary;
  std::vector<double> truth;  // mmHg
  std::vector<double> pred;   // mmHg
};

struct EvalReport {
  std::string model;
  std::string config_hash;
  double wall_seconds = 0.0;  // informational; never written to report files
  std::array<std::optional<CategoryResult>, 4> categories;
  std::vector<WindowPrediction> predictions;

  const std::optional<CategoryResult>& at(Category c) const {
    return categories[static_cast<std::size_t>(c)];
  }
};

/// Scores denormalized predictions per trend category and over their union.
/// Categories without windows are left absent.
EvalReport evaluate(models::Model& model, std::span<const WindowPair> windows,
                    const Normalization& norm, const std::string& name);

/// Persistence scored directly on raw mmHg values.
EvalReport evaluate_persistence(std::span<const WindowPair> windows,
                                const std::string& name = "persistence");

/// Builds per-category results from finished predictions.
void score(EvalReport& report);

struct LeaderboardEntry {
  std::size_t candidate = 0;  // grid index
  std::string description;
  double holdout_rmse = 0.0;
};

struct SearchResult {
  std::vector<LeaderboardEntry> leaderboard;  // best first, ties by grid order
  std::size_t best = 0;
  std::unique_ptr<models::Model> best_model;
};

/// Trains every grid candidate identically and ranks by holdout RMSE in mmHg.
SearchResult holdout_search(const std::vector<models::ModelConfig>& grid,
                            std::span<const WindowPair> train_set,
                            std::span<const WindowPair> holdout_set, const Normalization& norm,
                            const TrainConfig& config);

std::string describe(const models::ModelConfig& config);

/// Settings for the overfit probe: batch 8, at most 2000 steps, a slow
/// plateau decay, and a step size picked per architecture.
TrainConfig probe_train_config(models::Architecture arch, std::uint64_t seed = 0);

struct ProbeResult {
  double train_rmse = 0.0;  // mmHg
  std::size_t steps = 0;
  double seconds = 0.0;
};

/// Fits a model to a handful of windows and scores it on those same windows.
ProbeResult overfit_probe(const models::ModelConfig& config, std::span<const WindowPair> windows,
                          const TrainConfig& train_config);

// Report files. Numbers use shortest round-trip formatting so that equal
// inputs always give byte-identical files.
void write_table(std::ostream& out, std::span<const EvalReport> reports);
void write_summary(std::ostream& out, std::span<const EvalReport> reports);
void write_step_table(std::ostream& out, std::span<const EvalReport> reports);
void write_traces(std::ostream& out, const EvalReport& report);
void write_history(std::ostream& out, const History& history);

/// table.csv, summary.csv, per_step.csv and traces/<model>.csv under dir.
void write_reports(const std::filesystem::path& dir, std::span<const EvalReport> reports);

/// Reads table.csv back into reports without predictions.
std::vector<EvalReport> read_table(std::istream& in);

}  // namespace mapcast::bench
