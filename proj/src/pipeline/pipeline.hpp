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

// Run configuration and the end-to-end commands behind the command line.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bench/bench.hpp"
#include "common/kv.hpp"
#include "models/model.hpp"
#include "signal/signal.hpp"
#include "synth/synth.hpp"

namespace mapcast::pipeline {

namespace fs = std::filesystem;

/// Fully typed configuration. Sub-seeds are derived from `seed`.
struct Resolved {
  std::uint64_t seed = 0;
  bool deterministic = false;

  synth::SynthConfig synth;
  std::size_t synth_count = 8;

  signal::CsvSchema csv;
  std::size_t block = signal::kBlock;
  signal::WindowGeometry geometry;
  signal::TrendOptions trend;

  signal::SplitSpec split;
  signal::LabelFilter labels;

  models::ModelConfig model;
  bench::TrainConfig train;
  std::size_t probe_windows = 8;

  bool include_persistence = true;
  double alert_threshold = signal::kHypotensionMmHg;

  /// Every key with its resolved value, in key order.
  KvDocument document() const;
};

/// Key-value overrides on top of the defaults. Unknown keys are rejected with
/// a Usage error naming the key.
class RunConfig {
 public:
  void set(const std::string& key, const std::string& value);
  void load(const fs::path& path);
  Resolved resolve() const;

  static const std::vector<std::string>& keys();

 private:
  KvDocument overrides_;
};

using Log = std::function<void(const std::string&)>;

struct SynthSummary {
  std::size_t recordings = 0;
  std::size_t events = 0;
};

struct PrepareSummary {
  signal::Composition all, train, holdout, test;
};

struct TrainSummary {
  bench::History history;
  std::optional<bench::ProbeResult> probe;
};

struct Forecast {
  std::vector<double> values;  // mmHg, one per AT step after the offset
  std::vector<signal::IndexRange> alerts;
};

/// Writes rec_NNN.csv files and manifest.txt.
SynthSummary run_synth(const Resolved& cfg, const fs::path& out_dir, const Log& log);

/// Reads every .csv in a directory and writes train/holdout/test caches.
PrepareSummary run_prepare(const Resolved& cfg, const fs::path& recordings_dir,
                           const fs::path& out_dir, const Log& log);

/// Trains on the cache's training split, or runs the overfit probe on a few
/// training windows when `probe` is set.
TrainSummary run_train(const Resolved& cfg, const fs::path& cache_dir, const fs::path& out_dir,
                       bool probe, const Log& log);

/// Scores trained models (and persistence when configured) on the test split.
std::vector<bench::EvalReport> run_eval(const Resolved& cfg,
                                        const std::vector<fs::path>& model_dirs,
                                        const fs::path& cache_dir, const fs::path& out_dir,
                                        const Log& log);

/// Forecasts the steps after AT index `offset` of one recording.
Forecast run_forecast(const Resolved& cfg, const fs::path& model_dir, const fs::path& csv,
                      std::size_t offset, const Log& log);

/// Merges report tables from several eval directories.
std::vector<bench::EvalReport> run_report(const Resolved& cfg,
                                          const std::vector<fs::path>& report_dirs,
                                          const fs::path& out_dir, const Log& log);

/// A trained model restored from a model directory.
struct LoadedModel {
  std::unique_ptr<models::Model> model;
  bench::Normalization norm;
  std::string name;
  std::string config_hash;
};

LoadedModel load_model(const fs::path& model_dir);

/// Windows of the named split ("train", "holdout" or "test").
std::vector<signal::WindowPair> load_split(const fs::path& cache_dir, const std::string& split,
                                           signal::WindowGeometry* geom = nullptr);

}  // namespace mapcast::pipeline
