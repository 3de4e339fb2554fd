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

// Ingest, downsampling, windowing, trend labelling and dataset assembly for
// aortic-pressure recordings.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mapcast::signal {

inline constexpr double kRtRateHz = 25.0;
inline constexpr double kAtRateHz = 0.1;
inline constexpr std::size_t kBlock = 250;
inline constexpr std::size_t kInLen = 30;
inline constexpr std::size_t kOutLen = 30;
inline constexpr double kSwingMmHg = 10.0;
inline constexpr double kHypotensionMmHg = 65.0;

struct RtRecord {
  std::int64_t t = 0;
  double aop = 0.0;  // mmHg
  double rpm = 0.0;
};

struct RtSeries {
  std::string recording_id;
  std::vector<RtRecord> records;
  bool has_rpm = false;

  std::size_t size() const { return records.size(); }
};

struct AtSeries {
  std::string recording_id;
  std::vector<double> values;
  std::optional<std::vector<double>> rpm_values;

  std::size_t size() const { return values.size(); }
};

enum class TrendLabel : std::uint8_t {
  Increasing = 0,
  Decreasing = 1,
  Stationary = 2,
};

inline constexpr TrendLabel kAllLabels[] = {
    TrendLabel::Increasing, TrendLabel::Decreasing, TrendLabel::Stationary};

const char* label_code(TrendLabel label);  // "I", "D", "S"
TrendLabel parse_label(std::string_view code);

struct WindowPair {
  std::vector<double> input;
  std::vector<double> target;
  std::optional<std::vector<double>> input_rpm;
  TrendLabel label = TrendLabel::Stationary;
  std::string recording_id;
  std::uint64_t offset = 0;  // AT index of input[0]

  bool operator==(const WindowPair&) const = default;
};

struct CsvSchema {
  std::string t_column = "t";
  std::string aop_column = "aop_mmhg";
  std::string rpm_column = "rpm";  // optional in the file
};

/// Parses the per-recording CSV. Throws Data errors naming the line.
RtSeries ingest_csv(std::istream& in, const CsvSchema& schema,
                    std::string recording_id);

/// Writes the CSV form read by ingest_csv.
void write_csv(std::ostream& out, const RtSeries& series);

/// Block means over `block` RT samples; a trailing partial block is dropped.
AtSeries downsample(const RtSeries& rt, std::size_t block = kBlock);

enum class SwingStatistic {
  Net,    // last - first
  Range,  // max - min, signed by whether the max comes after the min
};

struct TrendOptions {
  double threshold = kSwingMmHg;
  SwingStatistic statistic = SwingStatistic::Net;
  std::size_t length = kInLen + kOutLen;
};

TrendLabel classify_trend(std::span<const double> values,
                          const TrendOptions& opts = {});

struct WindowGeometry {
  std::size_t in_len = kInLen;
  std::size_t out_len = kOutLen;
  std::size_t stride = 1;

  std::size_t span() const { return in_len + out_len; }
};

/// Number of windows make_windows emits for a series of the given length.
std::size_t window_count(std::size_t length, const WindowGeometry& geom);

std::vector<WindowPair> make_windows(const AtSeries& at,
                                     const WindowGeometry& geom = {},
                                     TrendOptions trend = {});

struct Composition {
  std::size_t increasing = 0;
  std::size_t decreasing = 0;
  std::size_t stationary = 0;

  std::size_t total() const { return increasing + decreasing + stationary; }
  std::size_t count(TrendLabel label) const;
  void add(TrendLabel label);
  bool operator==(const Composition&) const = default;
};

Composition compose(std::span<const WindowPair> windows);

enum class SplitMode { ByRecording, ByWindow };

struct SplitSpec {
  double test_fraction = 0.2;
  double holdout_fraction = 0.1;  // of the training pool
  SplitMode mode = SplitMode::ByRecording;
  std::uint64_t seed = 0;
};

struct LabelFilter {
  bool increasing = true;
  bool decreasing = true;
  bool stationary = true;

  bool accepts(TrendLabel label) const;
  bool empty() const { return !increasing && !decreasing && !stationary; }
  static LabelFilter parse(std::string_view codes);  // e.g. "I,D"
  std::string to_string() const;
};

struct Split {
  std::vector<WindowPair> windows;
  Composition composition;
};

struct Dataset {
  Split train;
  Split holdout;
  Split test;
};

Dataset assemble_dataset(std::vector<WindowPair> windows, const SplitSpec& spec,
                         const LabelFilter& filter = {});

using IndexRange = std::pair<std::size_t, std::size_t>;  // inclusive

/// Maximal runs of values strictly below threshold.
std::vector<IndexRange> alert_scan(std::span<const double> values,
                                   double threshold = kHypotensionMmHg);

}  // namespace mapcast::signal
