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

#include "signal/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "common/error.hpp"
#include "common/kv.hpp"
#include "common/rng.hpp"

namespace mapcast::signal {

const char* label_code(TrendLabel label) {
  switch (label) {
    case TrendLabel::Increasing:
      return "I";
    case TrendLabel::Decreasing:
      return "D";
    case TrendLabel::Stationary:
      return "S";
  }
  return "?";
}

TrendLabel parse_label(std::string_view code) {
  if (code == "I") return TrendLabel::Increasing;
  if (code == "D") return TrendLabel::Decreasing;
  if (code == "S") return TrendLabel::Stationary;
  throw_usage("unknown trend label '" + std::string(code) + "'");
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(pos)));
      break;
    }
    out.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_field(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, out);
  return !s.empty() && res.ec == std::errc{} && res.ptr == end;
}

}  // namespace

RtSeries ingest_csv(std::istream& in, const CsvSchema& schema,
                    std::string recording_id) {
  RtSeries series;
  series.recording_id = std::move(recording_id);
  const std::string& id = series.recording_id;

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw_data(id + ": missing header row");
  }
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const auto header = split_fields(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto t_col = column(schema.t_column);
  const auto aop_col = column(schema.aop_column);
  const auto rpm_col = column(schema.rpm_column);
  if (!t_col) throw_data(id + ": missing required column '" + schema.t_column + "'");
  if (!aop_col) {
    throw_data(id + ": missing required column '" + schema.aop_column + "'");
  }
  series.has_rpm = rpm_col.has_value();

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    auto bad = [&](const std::string& why) {
      throw_data(id + ": malformed row at line " + std::to_string(line_no) +
                 ": " + why);
    };
    if (fields.size() != header.size()) {
      bad("expected " + std::to_string(header.size()) + " fields, got " +
          std::to_string(fields.size()));
    }
    RtRecord rec;
    if (!parse_field(fields[*t_col], rec.t)) bad("bad sample index");
    if (!parse_field(fields[*aop_col], rec.aop) || !std::isfinite(rec.aop)) {
      bad("bad aortic pressure '" + std::string(fields[*aop_col]) + "'");
    }
    if (rpm_col) {
      if (!parse_field(fields[*rpm_col], rec.rpm) || !std::isfinite(rec.rpm) ||
          rec.rpm < 0.0) {
        bad("bad motor speed '" + std::string(fields[*rpm_col]) + "'");
      }
    }
    if (!series.records.empty()) {
      const auto prev = series.records.back().t;
      if (rec.t <= prev) {
        throw_data(id + ": non-monotone sample index at line " +
                   std::to_string(line_no) + " (" + std::to_string(rec.t) +
                   " after " + std::to_string(prev) + ")");
      }
      if (rec.t != prev + 1) {
        throw_data(id + ": gap in sample index at line " +
                   std::to_string(line_no) + " (" + std::to_string(rec.t) +
                   " after " + std::to_string(prev) + ")");
      }
    }
    series.records.push_back(rec);
  }
  return series;
}

void write_csv(std::ostream& out, const RtSeries& series) {
  out << (series.has_rpm ? "t,aop_mmhg,rpm\n" : "t,aop_mmhg\n");
  for (const auto& r : series.records) {
    out << r.t << ',' << format_double(r.aop);
    if (series.has_rpm) out << ',' << format_double(r.rpm);
    out << '\n';
  }
}

AtSeries downsample(const RtSeries& rt, std::size_t block) {
  if (block == 0) throw_usage("downsample: block must be >= 1");
  AtSeries at;
  at.recording_id = rt.recording_id;
  const std::size_t n = rt.size() / block;
  at.values.resize(n);
  if (rt.has_rpm) at.rpm_values.emplace(n);
  for (std::size_t k = 0; k < n; ++k) {
    double aop = 0.0;
    double rpm = 0.0;
    for (std::size_t i = k * block; i < (k + 1) * block; ++i) {
      aop += rt.records[i].aop;
      rpm += rt.records[i].rpm;
    }
    at.values[k] = aop / static_cast<double>(block);
    if (at.rpm_values) (*at.rpm_values)[k] = rpm / static_cast<double>(block);
  }
  return at;
}

TrendLabel classify_trend(std::span<const double> values,
                          const TrendOptions& opts) {
  if (values.size() != opts.length) {
    throw_data("classify_trend: expected " + std::to_string(opts.length) +
               " values, got " + std::to_string(values.size()));
  }
  if (values.empty()) return TrendLabel::Stationary;
  double swing = 0.0;
  if (opts.statistic == SwingStatistic::Net) {
    swing = values.back() - values.front();
  } else {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range = *hi - *lo;
    swing = (hi > lo) ? range : -range;
  }
  if (swing >= opts.threshold) return TrendLabel::Increasing;
  if (swing <= -opts.threshold) return TrendLabel::Decreasing;
  return TrendLabel::Stationary;
}

std::size_t window_count(std::size_t length, const WindowGeometry& geom) {
  if (geom.stride == 0) throw_usage("make_windows: stride must be >= 1");
  if (length < geom.span()) return 0;
  return (length - geom.span()) / geom.stride + 1;
}

std::vector<WindowPair> make_windows(const AtSeries& at,
                                     const WindowGeometry& geom,
                                     TrendOptions trend) {
  if (geom.in_len == 0 || geom.out_len == 0 || geom.stride == 0) {
    throw_usage("make_windows: in_len, out_len and stride must be >= 1");
  }
  trend.length = geom.span();
  const std::size_t n = window_count(at.size(), geom);
  std::vector<WindowPair> out;
  out.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t off = w * geom.stride;
    WindowPair pair;
    const auto* base = at.values.data() + off;
    pair.input.assign(base, base + geom.in_len);
    pair.target.assign(base + geom.in_len, base + geom.span());
    if (at.rpm_values) {
      const auto* r = at.rpm_values->data() + off;
      pair.input_rpm.emplace(r, r + geom.in_len);
    }
    pair.label = classify_trend({base, geom.span()}, trend);
    pair.recording_id = at.recording_id;
    pair.offset = off;
    out.push_back(std::move(pair));
  }
  return out;
}

std::size_t Composition::count(TrendLabel label) const {
  switch (label) {
    case TrendLabel::Increasing:
      return increasing;
    case TrendLabel::Decreasing:
      return decreasing;
    case TrendLabel::Stationary:
      return stationary;
  }
  return 0;
}

void Composition::add(TrendLabel label) {
  switch (label) {
    case TrendLabel::Increasing:
      ++increasing;
      break;
    case TrendLabel::Decreasing:
      ++decreasing;
      break;
    case TrendLabel::Stationary:
      ++stationary;
      break;
  }
}

Composition compose(std::span<const WindowPair> windows) {
  Composition c;
  for (const auto& w : windows) c.add(w.label);
  return c;
}

bool LabelFilter::accepts(TrendLabel label) const {
  switch (label) {
    case TrendLabel::Increasing:
      return increasing;
    case TrendLabel::Decreasing:
      return decreasing;
    case TrendLabel::Stationary:
      return stationary;
  }
  return false;
}

LabelFilter LabelFilter::parse(std::string_view codes) {
  LabelFilter f{false, false, false};
  for (const auto& c : split_list(codes)) {
    switch (parse_label(c)) {
      case TrendLabel::Increasing:
        f.increasing = true;
        break;
      case TrendLabel::Decreasing:
        f.decreasing = true;
        break;
      case TrendLabel::Stationary:
        f.stationary = true;
        break;
    }
  }
  if (f.empty()) throw_usage("label filter must name at least one of I,D,S");
  return f;
}

std::string LabelFilter::to_string() const {
  std::string s;
  for (auto label : kAllLabels) {
    if (!accepts(label)) continue;
    if (!s.empty()) s += ',';
    s += label_code(label);
  }
  return s;
}

namespace {

std::size_t rounded_share(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

Dataset assemble_dataset(std::vector<WindowPair> windows, const SplitSpec& spec,
                         const LabelFilter& filter) {
  if (filter.empty()) throw_usage("assemble_dataset: empty label filter");
  if (!(spec.test_fraction >= 0.0 && spec.test_fraction < 1.0) ||
      !(spec.holdout_fraction >= 0.0 && spec.holdout_fraction < 1.0)) {
    throw_usage("assemble_dataset: fractions must lie in [0, 1)");
  }
  std::erase_if(windows, [&](const WindowPair& w) { return !filter.accepts(w.label); });
  if (windows.empty()) {
    throw_data("assemble_dataset: no windows left after filtering to {" +
               filter.to_string() + "}");
  }

  Rng rng(spec.seed);
  std::vector<WindowPair> pool;
  Dataset ds;

  if (spec.mode == SplitMode::ByWindow) {
    rng.shuffle(windows.begin(), windows.end());
    const std::size_t n_test = rounded_share(spec.test_fraction, windows.size());
    auto cut = windows.begin() + static_cast<std::ptrdiff_t>(n_test);
    ds.test.windows.assign(std::make_move_iterator(windows.begin()),
                           std::make_move_iterator(cut));
    pool.assign(std::make_move_iterator(cut),
                std::make_move_iterator(windows.end()));
  } else {
    std::set<std::string> ids;
    for (const auto& w : windows) ids.insert(w.recording_id);
    std::vector<std::string> order(ids.begin(), ids.end());
    rng.shuffle(order.begin(), order.end());
    std::size_t n_test = rounded_share(spec.test_fraction, order.size());
    if (spec.test_fraction > 0.0 && order.size() >= 2) {
      n_test = std::clamp<std::size_t>(n_test, 1, order.size() - 1);
    }
    const std::set<std::string> test_ids(order.begin(),
                                         order.begin() + static_cast<std::ptrdiff_t>(n_test));
    for (auto& w : windows) {
      (test_ids.count(w.recording_id) ? ds.test.windows : pool).push_back(std::move(w));
    }
    rng.shuffle(ds.test.windows.begin(), ds.test.windows.end());
    rng.shuffle(pool.begin(), pool.end());
  }

  const std::size_t n_holdout = rounded_share(spec.holdout_fraction, pool.size());
  auto cut = pool.begin() + static_cast<std::ptrdiff_t>(n_holdout);
  ds.holdout.windows.assign(std::make_move_iterator(pool.begin()),
                            std::make_move_iterator(cut));
  ds.train.windows.assign(std::make_move_iterator(cut),
                          std::make_move_iterator(pool.end()));

  for (Split* s : {&ds.train, &ds.holdout, &ds.test}) {
    s->composition = compose(s->windows);
  }
  return ds;
}

std::vector<IndexRange> alert_scan(std::span<const double> values,
                                   double threshold) {
  if (!(threshold > 0.0)) throw_usage("alert_scan: threshold must be > 0");
  std::vector<IndexRange> out;
  std::size_t i = 0;
  while (i < values.size()) {
    if (values[i] < threshold) {
      std::size_t j = i;
      while (j + 1 < values.size() && values[j + 1] < threshold) ++j;
      out.emplace_back(i, j);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace mapcast::signal
