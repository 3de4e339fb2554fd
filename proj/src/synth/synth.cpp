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

#include "synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace mapcast::synth {

void SynthConfig::validate() const {
  if (!(duration_s > 0.0)) throw_usage("synth: duration_s must be > 0");
  if (!(pulse_pressure >= 0.0)) throw_usage("synth: pulse_pressure must be >= 0");
  if (!(heart_rate_bpm >= 30.0 && heart_rate_bpm <= 200.0)) {
    throw_usage("synth: heart_rate_bpm must lie in [30, 200]");
  }
  if (!(drift_sd >= 0.0) || !(noise_sd >= 0.0)) {
    throw_usage("synth: drift_sd and noise_sd must be >= 0");
  }
  if (!(drift_reversion >= 0.0 && drift_reversion < 1.0)) {
    throw_usage("synth: drift_reversion must lie in [0, 1)");
  }
  if (!(trend_rate_per_hr >= 0.0)) throw_usage("synth: trend_rate_per_hr must be >= 0");
  if (!(trend_magnitude_min >= signal::kSwingMmHg) ||
      trend_magnitude_max < trend_magnitude_min) {
    throw_usage("synth: trend magnitudes must satisfy 10 <= min <= max");
  }
  if (!(trend_duration_min > 0.0) || trend_duration_max < trend_duration_min) {
    throw_usage("synth: trend durations must satisfy 0 < min <= max");
  }
  if (rpm_levels.empty()) throw_usage("synth: rpm_levels must not be empty");
  for (double r : rpm_levels) {
    if (!(r >= 0.0)) throw_usage("synth: rpm levels must be >= 0");
  }
  if (!(rpm_change_rate_per_hr >= 0.0)) {
    throw_usage("synth: rpm_change_rate_per_hr must be >= 0");
  }
}

std::string SynthConfig::canonical() const {
  std::string levels;
  for (double r : rpm_levels) {
    if (!levels.empty()) levels += ',';
    levels += format_double(r);
  }
  std::ostringstream ss;
  ss << "duration_s=" << format_double(duration_s)
     << ";baseline_map=" << format_double(baseline_map)
     << ";pulse_pressure=" << format_double(pulse_pressure)
     << ";heart_rate_bpm=" << format_double(heart_rate_bpm)
     << ";drift_sd=" << format_double(drift_sd)
     << ";drift_reversion=" << format_double(drift_reversion)
     << ";noise_sd=" << format_double(noise_sd)
     << ";trend_rate_per_hr=" << format_double(trend_rate_per_hr)
     << ";trend_magnitude=" << format_double(trend_magnitude_min) << ","
     << format_double(trend_magnitude_max)
     << ";trend_duration=" << format_double(trend_duration_min) << ","
     << format_double(trend_duration_max)
     << ";max_trend_offset=" << format_double(max_trend_offset)
     << ";rpm_levels=" << levels
     << ";rpm_change_rate_per_hr=" << format_double(rpm_change_rate_per_hr)
     << ";seed=" << seed;
  return ss.str();
}

std::uint64_t SynthConfig::hash() const { return fnv1a(canonical()); }

double series_span_s(const signal::RtSeries& series) {
  if (series.size() < 2) return 0.0;
  return static_cast<double>(series.size() - 1) / signal::kRtRateHz;
}

namespace {

double ramp_value(const TrendEvent& e, double t_s) {
  if (t_s <= e.start_s) return 0.0;
  const double end = e.start_s + e.duration_s;
  if (t_s >= end || e.duration_s <= 0.0) return e.delta;
  return e.delta * (t_s - e.start_s) / e.duration_s;
}

std::vector<TrendEvent> draw_events(const SynthConfig& cfg, double span_s, Rng& rng) {
  std::vector<TrendEvent> events;
  if (cfg.trend_rate_per_hr <= 0.0) return events;
  const double rate_per_s = cfg.trend_rate_per_hr / 3600.0;
  double t = 0.0;
  double last_end = 0.0;
  double offset = 0.0;
  while (true) {
    t += rng.exponential(rate_per_s);
    if (t >= span_s) break;
    TrendEvent e;
    e.start_s = t;
    e.duration_s = rng.uniform(cfg.trend_duration_min, cfg.trend_duration_max);
    const double magnitude =
        rng.uniform(cfg.trend_magnitude_min, cfg.trend_magnitude_max);
    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    // draws are consumed before rejection so the stream does not depend on it
    if (e.start_s < last_end || e.start_s + e.duration_s > span_s) continue;
    if (std::abs(offset + sign * magnitude) > cfg.max_trend_offset) sign = -sign;
    e.delta = sign * magnitude;
    offset += e.delta;
    last_end = e.start_s + e.duration_s;
    events.push_back(e);
  }
  return events;
}

}  // namespace

Recording generate(const SynthConfig& config, std::string recording_id) {
  config.validate();
  Recording rec;
  rec.seed = config.seed;
  auto& series = rec.series;
  series.recording_id = std::move(recording_id);
  series.has_rpm = true;

  const auto n = static_cast<std::size_t>(
      std::llround(config.duration_s * signal::kRtRateHz));
  series.records.resize(n);
  const double span = n >= 2 ? static_cast<double>(n - 1) / signal::kRtRateHz : 0.0;

  // independent streams so toggling one stochastic term leaves the others intact
  Rng event_rng(derive_seed(config.seed, "events"));
  Rng drift_rng(derive_seed(config.seed, "drift"));
  Rng noise_rng(derive_seed(config.seed, "noise"));
  Rng rpm_rng(derive_seed(config.seed, "rpm"));

  rec.events = draw_events(config, span, event_rng);

  const double omega = 2.0 * std::numbers::pi * config.heart_rate_bpm / 60.0;
  const double rpm_rate_per_s = config.rpm_change_rate_per_hr / 3600.0;
  std::size_t level = rpm_rng.below(config.rpm_levels.size());
  double next_rpm_change = rpm_rate_per_s > 0.0 ? rpm_rng.exponential(rpm_rate_per_s)
                                                : std::numeric_limits<double>::infinity();
  double walk = 0.0;
  std::size_t ev = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t_s = static_cast<double>(k) / signal::kRtRateHz;
    while (t_s >= next_rpm_change) {
      if (config.rpm_levels.size() > 1) {
        const auto step = 1 + rpm_rng.below(config.rpm_levels.size() - 1);
        level = (level + step) % config.rpm_levels.size();
      }
      next_rpm_change += rpm_rng.exponential(rpm_rate_per_s);
    }
    double trend = 0.0;
    while (ev < rec.events.size() &&
           t_s >= rec.events[ev].start_s + rec.events[ev].duration_s) {
      ++ev;
    }
    for (std::size_t j = 0; j < rec.events.size(); ++j) {
      if (j > ev) break;
      trend += ramp_value(rec.events[j], t_s);
    }
    double aop = config.baseline_map + walk + trend;
    if (config.pulse_pressure > 0.0) {
      aop += 0.5 * config.pulse_pressure * std::sin(omega * t_s);
    }
    if (config.noise_sd > 0.0) aop += config.noise_sd * noise_rng.normal();
    if (aop < kMinPressure || aop > kMaxPressure) {
      aop = std::clamp(aop, kMinPressure, kMaxPressure);
      ++rec.clamped_samples;
    }
    series.records[k] = {static_cast<std::int64_t>(k), aop,
                         config.rpm_levels[level]};
    if (config.drift_sd > 0.0) {
      walk += -config.drift_reversion * walk + config.drift_sd * drift_rng.normal();
    }
  }
  return rec;
}

signal::RtSeries inject_event(signal::RtSeries series, const TrendEvent& event) {
  const double span = series_span_s(series);
  if (event.start_s < 0.0 || event.duration_s < 0.0 ||
      event.start_s + event.duration_s > span + 1e-9) {
    throw_data("inject_event: event [" + format_double(event.start_s) + ", " +
               format_double(event.start_s + event.duration_s) +
               "] s outside recording span of " + format_double(span) + " s");
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double t_s = static_cast<double>(k) / signal::kRtRateHz;
    series.records[k].aop += ramp_value(event, t_s);
  }
  return series;
}

std::size_t Corpus::total_events() const {
  std::size_t n = 0;
  for (const auto& r : recordings) n += r.events.size();
  return n;
}

std::string recording_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rec_%03zu", index);
  return buf;
}

Corpus make_corpus(const SynthConfig& config, std::size_t count) {
  if (count == 0) throw_usage("synth: recording count must be >= 1");
  config.validate();
  Corpus corpus;
  corpus.config = config;
  for (std::size_t i = 0; i < count; ++i) {
    SynthConfig c = config;
    c.seed = derive_seed(config.seed, "recording", i);
    corpus.recordings.push_back(generate(c, recording_name(i)));
  }
  return corpus;
}

KvDocument Corpus::manifest() const {
  KvDocument doc;
  doc.add_comment("mapcast synthetic corpus manifest");
  doc.add("recordings", std::to_string(recordings.size()));
  doc.add("root_seed", std::to_string(config.seed));
  doc.add("total_events", std::to_string(total_events()));
  for (const auto& r : recordings) {
    SynthConfig c = config;
    c.seed = r.seed;
    doc.add("recording", r.series.recording_id);
    doc.add("seed", std::to_string(r.seed));
    doc.add("config_hash", std::to_string(c.hash()));
    doc.add("samples", std::to_string(r.series.size()));
    doc.add("clamped_samples", std::to_string(r.clamped_samples));
    doc.add("events", std::to_string(r.events.size()));
    for (const auto& e : r.events) {
      doc.add("event", format_double(e.start_s) + "," + format_double(e.duration_s) +
                           "," + format_double(e.delta));
    }
  }
  return doc;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw_io("cannot create directory " + out_dir.string() + ": " + ec.message());
  for (const auto& r : corpus.recordings) {
    const auto path = out_dir / (r.series.recording_id + ".csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open for writing: " + path.string());
    signal::write_csv(out, r.series);
    if (!out) throw_io("write failed: " + path.string());
  }
  corpus.manifest().save(out_dir / "manifest.txt");
}

}  // namespace mapcast::synth
