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

// Synthetic 25 Hz aortic-pressure and motor-speed recordings with injected
// linear trend events. Stands in for clinical pump recordings.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "common/kv.hpp"
#include "signal/signal.hpp"

namespace mapcast::synth {

struct SynthConfig {
  double duration_s = 7200.0;
  double baseline_map = 75.0;
  double pulse_pressure = 40.0;
  double heart_rate_bpm = 75.0;
  double drift_sd = 0.02;          // mmHg per sqrt(sample)
  double drift_reversion = 1e-5;   // per sample, toward baseline_map
  double noise_sd = 1.0;
  double trend_rate_per_hr = 4.0;
  double trend_magnitude_min = 10.0;
  double trend_magnitude_max = 30.0;
  double trend_duration_min = 120.0;
  double trend_duration_max = 600.0;
  // Events whose sign would push the accumulated offset past this bound are
  // flipped, which keeps long recordings inside the physiological range.
  double max_trend_offset = 40.0;
  std::vector<double> rpm_levels = {33000.0, 37000.0, 41000.0, 46000.0};
  double rpm_change_rate_per_hr = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Canonical text used for hashing and for the resolved config.
  std::string canonical() const;
  std::uint64_t hash() const;
};

struct TrendEvent {
  double start_s = 0.0;
  double duration_s = 0.0;
  double delta = 0.0;  // mmHg

  bool operator==(const TrendEvent&) const = default;
};

inline constexpr double kMinPressure = 20.0;
inline constexpr double kMaxPressure = 200.0;

struct Recording {
  signal::RtSeries series;
  std::vector<TrendEvent> events;
  std::uint64_t seed = 0;
  std::size_t clamped_samples = 0;
};

/// Seconds spanned by the series' sample grid: (n - 1) / 25.
double series_span_s(const signal::RtSeries& series);

Recording generate(const SynthConfig& config, std::string recording_id = "rec");

/// Adds a ramp 0 -> delta over [start, start + duration] that then holds.
signal::RtSeries inject_event(signal::RtSeries series, const TrendEvent& event);

struct Corpus {
  std::vector<Recording> recordings;
  SynthConfig config;

  std::size_t total_events() const;
  KvDocument manifest() const;
};

/// Recording i uses a seed derived from config.seed and i.
Corpus make_corpus(const SynthConfig& config, std::size_t count);

/// Writes rec_NNN.csv files plus manifest.txt. Throws Io on failure.
void write_corpus(const Corpus& corpus, const std::filesystem::path& out_dir);

std::string recording_name(std::size_t index);

}  // namespace mapcast::synth
