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

#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "numeric/checkpoint.hpp"
#include "signal/window_cache.hpp"

namespace mapcast::pipeline {

namespace {

constexpr const char* kResolvedName = "config.txt";
constexpr const char* kModelName = "model.txt";
constexpr const char* kCheckpointName = "checkpoint.hfck";
constexpr const char* kHistoryName = "history.csv";

// Keys owned by the model and train configs that the run config sets itself.
bool derived_key(const std::string& key) {
  return key == "model.in_len" || key == "model.out_len" || key == "model.seed" ||
         key == "train.seed";
}

std::vector<std::string> build_keys() {
  std::vector<std::string> k = {
      "seed", "deterministic",
      "synth.count", "synth.duration_s", "synth.baseline_map", "synth.pulse_pressure",
      "synth.heart_rate_bpm", "synth.drift_sd", "synth.drift_reversion", "synth.noise_sd",
      "synth.trend_rate_per_hr", "synth.trend_magnitude_min", "synth.trend_magnitude_max",
      "synth.trend_duration_min", "synth.trend_duration_max", "synth.max_trend_offset",
      "synth.rpm_levels", "synth.rpm_change_rate_per_hr",
      "signal.t_column", "signal.aop_column", "signal.rpm_column", "signal.block",
      "signal.in_len", "signal.out_len", "signal.stride", "signal.threshold",
      "signal.statistic",
      "split.test_fraction", "split.holdout_fraction", "split.mode", "split.labels"};
  for (const auto& m : models::ModelConfig::keys()) {
    if (!derived_key("model." + m)) k.push_back("model." + m);
  }
  for (const auto& t : bench::TrainConfig::keys()) {
    if (!derived_key("train." + t)) k.push_back("train." + t);
  }
  k.insert(k.end(), {"probe.windows", "eval.include_persistence", "alert.threshold"});
  return k;
}

std::size_t parse_size(const std::string& v, const std::string& key) {
  const auto n = parse_int(v, key);
  if (n < 0) throw_usage(key + ": must be non-negative");
  return static_cast<std::size_t>(n);
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

void write_resolved(const Resolved& cfg, const fs::path& dir) {
  cfg.document().save(dir / kResolvedName);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw_io("cannot create directory " + dir.string());
}

std::string composition_line(const signal::Composition& c) {
  return "I=" + std::to_string(c.increasing) + ", D=" + std::to_string(c.decreasing) +
         ", S=" + std::to_string(c.stationary);
}

std::string rmse_line(const bench::EvalReport& r) {
  std::string s = r.model + ":";
  for (auto c : bench::kCategories) {
    s += std::string(" ") + bench::category_name(c) + "=";
    const auto& res = r.at(c);
    if (res) {
      std::ostringstream os;
      os.setf(std::ios::fixed);
      os.precision(3);
      os << res->rmse;
      s += os.str();
    } else {
      s += "-";
    }
  }
  return s + " mmHg";
}

signal::RtSeries read_recording(const fs::path& path, const signal::CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open " + path.string());
  try {
    return signal::ingest_csv(in, schema, path.stem().string());
  } catch (const Error& e) {
    throw Error(e.kind(), path.filename().string() + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = build_keys();
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& k = keys();
  if (std::find(k.begin(), k.end(), key) == k.end()) {
    throw_usage("unknown configuration key '" + key + "'");
  }
  overrides_.add(key, value);
}

void RunConfig::load(const fs::path& path) {
  const auto doc = KvDocument::load(path);
  for (const auto& [k, v] : doc.entries()) {
    if (!k.empty()) set(k, v);
  }
}

Resolved RunConfig::resolve() const {
  Resolved r;
  const auto& d = overrides_;
  auto get = [&](const char* key) { return d.get(key); };
  auto real = [&](const char* key, double& out) {
    if (auto v = get(key)) out = parse_double(*v, key);
  };
  auto count = [&](const char* key, std::size_t& out) {
    if (auto v = get(key)) out = parse_size(*v, key);
  };

  if (auto v = get("seed")) r.seed = parse_u64(*v, "seed");
  if (auto v = get("deterministic")) r.deterministic = parse_bool(*v, "deterministic");

  auto& s = r.synth;
  count("synth.count", r.synth_count);
  real("synth.duration_s", s.duration_s);
  real("synth.baseline_map", s.baseline_map);
  real("synth.pulse_pressure", s.pulse_pressure);
  real("synth.heart_rate_bpm", s.heart_rate_bpm);
  real("synth.drift_sd", s.drift_sd);
  real("synth.drift_reversion", s.drift_reversion);
  real("synth.noise_sd", s.noise_sd);
  real("synth.trend_rate_per_hr", s.trend_rate_per_hr);
  real("synth.trend_magnitude_min", s.trend_magnitude_min);
  real("synth.trend_magnitude_max", s.trend_magnitude_max);
  real("synth.trend_duration_min", s.trend_duration_min);
  real("synth.trend_duration_max", s.trend_duration_max);
  real("synth.max_trend_offset", s.max_trend_offset);
  if (auto v = get("synth.rpm_levels")) {
    s.rpm_levels.clear();
    for (const auto& x : split_list(*v)) s.rpm_levels.push_back(parse_double(x, "synth.rpm_levels"));
  }
  real("synth.rpm_change_rate_per_hr", s.rpm_change_rate_per_hr);
  s.seed = derive_seed(r.seed, "synth");
  s.validate();

  if (auto v = get("signal.t_column")) r.csv.t_column = *v;
  if (auto v = get("signal.aop_column")) r.csv.aop_column = *v;
  if (auto v = get("signal.rpm_column")) r.csv.rpm_column = *v;
  count("signal.block", r.block);
  count("signal.in_len", r.geometry.in_len);
  count("signal.out_len", r.geometry.out_len);
  count("signal.stride", r.geometry.stride);
  real("signal.threshold", r.trend.threshold);
  if (auto v = get("signal.statistic")) {
    if (*v == "net") {
      r.trend.statistic = signal::SwingStatistic::Net;
    } else if (*v == "range") {
      r.trend.statistic = signal::SwingStatistic::Range;
    } else {
      throw_usage("signal.statistic: expected 'net' or 'range'");
    }
  }
  if (r.block == 0) throw_usage("signal.block must be >= 1");
  if (r.geometry.in_len == 0 || r.geometry.out_len == 0 || r.geometry.stride == 0) {
    throw_usage("signal.in_len, signal.out_len and signal.stride must be >= 1");
  }
  r.trend.length = r.geometry.span();

  real("split.test_fraction", r.split.test_fraction);
  real("split.holdout_fraction", r.split.holdout_fraction);
  if (auto v = get("split.mode")) {
    if (*v == "recording") {
      r.split.mode = signal::SplitMode::ByRecording;
    } else if (*v == "window") {
      r.split.mode = signal::SplitMode::ByWindow;
    } else {
      throw_usage("split.mode: expected 'recording' or 'window'");
    }
  }
  if (auto v = get("split.labels")) r.labels = signal::LabelFilter::parse(*v);
  if (r.labels.empty()) throw_usage("split.labels must keep at least one label");
  r.split.seed = derive_seed(r.seed, "split");

  r.model = models::ModelConfig::read(d);
  r.model.in_len = r.geometry.in_len;
  r.model.out_len = r.geometry.out_len;
  r.model.seed = derive_seed(r.seed, "model");
  r.model.validate();

  r.train = bench::TrainConfig::read(d);
  r.train.seed = derive_seed(r.seed, "train");
  r.train.validate();

  count("probe.windows", r.probe_windows);
  if (r.probe_windows == 0) throw_usage("probe.windows must be >= 1");
  if (auto v = get("eval.include_persistence")) {
    r.include_persistence = parse_bool(*v, "eval.include_persistence");
  }
  real("alert.threshold", r.alert_threshold);
  return r;
}

KvDocument Resolved::document() const {
  KvDocument d;
  d.add_comment("resolved mapcast configuration");
  d.add("seed", std::to_string(seed));
  d.add("deterministic", deterministic ? "true" : "false");
  d.add("synth.count", std::to_string(synth_count));
  d.add("synth.duration_s", format_double(synth.duration_s));
  d.add("synth.baseline_map", format_double(synth.baseline_map));
  d.add("synth.pulse_pressure", format_double(synth.pulse_pressure));
  d.add("synth.heart_rate_bpm", format_double(synth.heart_rate_bpm));
  d.add("synth.drift_sd", format_double(synth.drift_sd));
  d.add("synth.drift_reversion", format_double(synth.drift_reversion));
  d.add("synth.noise_sd", format_double(synth.noise_sd));
  d.add("synth.trend_rate_per_hr", format_double(synth.trend_rate_per_hr));
  d.add("synth.trend_magnitude_min", format_double(synth.trend_magnitude_min));
  d.add("synth.trend_magnitude_max", format_double(synth.trend_magnitude_max));
  d.add("synth.trend_duration_min", format_double(synth.trend_duration_min));
  d.add("synth.trend_duration_max", format_double(synth.trend_duration_max));
  d.add("synth.max_trend_offset", format_double(synth.max_trend_offset));
  d.add("synth.rpm_levels", join_doubles(synth.rpm_levels));
  d.add("synth.rpm_change_rate_per_hr", format_double(synth.rpm_change_rate_per_hr));
  d.add("signal.t_column", csv.t_column);
  d.add("signal.aop_column", csv.aop_column);
  d.add("signal.rpm_column", csv.rpm_column);
  d.add("signal.block", std::to_string(block));
  d.add("signal.in_len", std::to_string(geometry.in_len));
  d.add("signal.out_len", std::to_string(geometry.out_len));
  d.add("signal.stride", std::to_string(geometry.stride));
  d.add("signal.threshold", format_double(trend.threshold));
  d.add("signal.statistic", trend.statistic == signal::SwingStatistic::Net ? "net" : "range");
  d.add("split.test_fraction", format_double(split.test_fraction));
  d.add("split.holdout_fraction", format_double(split.holdout_fraction));
  d.add("split.mode", split.mode == signal::SplitMode::ByRecording ? "recording" : "window");
  d.add("split.labels", labels.to_string());
  KvDocument m;
  model.write(m);
  train.write(m);
  for (const auto& [k, v] : m.entries()) {
    if (!derived_key(k)) d.add(k, v);
  }
  d.add("probe.windows", std::to_string(probe_windows));
  d.add("eval.include_persistence", include_persistence ? "true" : "false");
  d.add("alert.threshold", format_double(alert_threshold));
  return d;
}

// ---------------------------------------------------------------------------
// commands

SynthSummary run_synth(const Resolved& cfg, const fs::path& out_dir, const Log& log) {
  log("root seed " + std::to_string(cfg.seed));
  const auto corpus = synth::make_corpus(cfg.synth, cfg.synth_count);
  ensure_dir(out_dir);
  synth::write_corpus(corpus, out_dir);
  write_resolved(cfg, out_dir);
  SynthSummary s{corpus.recordings.size(), corpus.total_events()};
  for (const auto& r : corpus.recordings) {
    log(r.series.recording_id + ": " + std::to_string(r.events.size()) + " events");
  }
  return s;
}

PrepareSummary run_prepare(const Resolved& cfg, const fs::path& recordings_dir,
                           const fs::path& out_dir, const Log& log) {
  log("root seed " + std::to_string(cfg.seed));
  if (!fs::is_directory(recordings_dir)) {
    throw_io("not a directory: " + recordings_dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(recordings_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw_data("no .csv recordings in " + recordings_dir.string());

  std::vector<signal::WindowPair> windows;
  for (const auto& f : files) {
    const auto at = signal::downsample(read_recording(f, cfg.csv), cfg.block);
    auto w = signal::make_windows(at, cfg.geometry, cfg.trend);
    if (w.empty()) {
      log("warning: " + f.filename().string() + " has " + std::to_string(at.size()) +
          " downsampled samples, fewer than one window (" +
          std::to_string(cfg.geometry.span()) + ")");
    }
    windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
  }

  PrepareSummary s;
  s.all = signal::compose(windows);
  signal::Dataset ds;
  if (!windows.empty()) ds = signal::assemble_dataset(std::move(windows), cfg.split, cfg.labels);
  s.train = ds.train.composition;
  s.holdout = ds.holdout.composition;
  s.test = ds.test.composition;

  ensure_dir(out_dir);
  signal::save_window_cache(out_dir / "train.hfwc", ds.train.windows, cfg.geometry);
  signal::save_window_cache(out_dir / "holdout.hfwc", ds.holdout.windows, cfg.geometry);
  signal::save_window_cache(out_dir / "test.hfwc", ds.test.windows, cfg.geometry);
  write_resolved(cfg, out_dir);

  log(composition_line(s.all));
  log("train " + composition_line(s.train));
  log("holdout " + composition_line(s.holdout));
  log("test " + composition_line(s.test));
  return s;
}

std::vector<signal::WindowPair> load_split(const fs::path& cache_dir, const std::string& split,
                                           signal::WindowGeometry* geom) {
  const auto path = cache_dir / (split + ".hfwc");
  if (!fs::exists(path)) throw_io("missing window cache " + path.string());
  return signal::load_window_cache(path, geom);
}

namespace {

void check_geometry(const signal::WindowGeometry& g, const models::ModelConfig& m,
                    const std::string& what) {
  if (g.in_len != m.in_len || g.out_len != m.out_len) {
    throw_data(what + ": cache geometry " + std::to_string(g.in_len) + "/" +
               std::to_string(g.out_len) + " does not match model geometry " +
               std::to_string(m.in_len) + "/" + std::to_string(m.out_len));
  }
}

void check_rpm(std::span<const signal::WindowPair> windows, const models::ModelConfig& m) {
  if (!m.use_rpm) return;
  for (const auto& w : windows) {
    if (!w.input_rpm) {
      throw_data("model uses rpm but window " + w.recording_id + "@" + std::to_string(w.offset) +
                 " has none");
    }
  }
}

// Evenly spaced windows from the training split.
std::vector<signal::WindowPair> probe_subset(const std::vector<signal::WindowPair>& train,
                                             std::size_t n) {
  if (train.size() < n) {
    throw_data("probe needs " + std::to_string(n) + " training windows, cache has " +
               std::to_string(train.size()));
  }
  std::vector<signal::WindowPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(train[i * train.size() / n]);
  return out;
}

std::string model_document_hash(const KvDocument& doc) {
  return std::to_string(fnv1a(doc.to_string()));
}

}  // namespace

TrainSummary run_train(const Resolved& cfg, const fs::path& cache_dir, const fs::path& out_dir,
                       bool probe, const Log& log) {
  log("root seed " + std::to_string(cfg.seed));
  signal::WindowGeometry geom;
  const auto train_set = load_split(cache_dir, "train", &geom);
  const auto holdout_set = load_split(cache_dir, "holdout");
  check_geometry(geom, cfg.model, "train");
  check_rpm(train_set, cfg.model);
  check_rpm(holdout_set, cfg.model);

  TrainSummary s;
  std::unique_ptr<models::Model> model;
  bench::Normalization norm;
  if (probe) {
    const auto windows = probe_subset(train_set, cfg.probe_windows);
    norm = bench::normalize_fit(windows);
    model = models::make_model(cfg.model);
    const auto tc = bench::probe_train_config(cfg.model.architecture, cfg.train.seed);
    s.history = bench::train(*model, windows, {}, norm, tc);
    bench::ProbeResult pr;
    pr.steps = s.history.steps;
    pr.train_rmse = bench::evaluate(*model, windows, norm, "probe").at(bench::Category::IDS)->rmse;
    s.probe = pr;
  } else {
    if (train_set.empty()) throw_data("training split is empty");
    norm = bench::normalize_fit(train_set);
    model = models::make_model(cfg.model);
    s.history = bench::train(*model, train_set, holdout_set, norm, cfg.train);
  }

  ensure_dir(out_dir);
  nc::save_checkpoint(out_dir / kCheckpointName, model->params());
  KvDocument md;
  md.add_comment("mapcast model description");
  cfg.model.write(md);
  norm.write(md);
  md.add("parameters", std::to_string(model->params().scalar_count()));
  md.save(out_dir / kModelName);
  {
    std::ofstream h(out_dir / kHistoryName, std::ios::binary);
    bench::write_history(h, s.history);
    if (!h) throw_io("cannot write " + (out_dir / kHistoryName).string());
  }
  write_resolved(cfg, out_dir);

  log(models::architecture_name(cfg.model.architecture) + ": " +
      std::to_string(model->params().scalar_count()) + " parameters, " +
      std::to_string(s.history.epochs.size()) + " epochs, " + std::to_string(s.history.steps) +
      " steps, best epoch " + std::to_string(s.history.best_epoch));
  if (s.probe) {
    std::ostringstream os;
    os.precision(4);
    os << "probe: final train RMSE " << s.probe->train_rmse << " mmHg over "
       << cfg.probe_windows << " windows";
    log(os.str());
  }
  return s;
}

LoadedModel load_model(const fs::path& model_dir) {
  const auto path = model_dir / kModelName;
  if (!fs::exists(path)) throw_io("missing model description " + path.string());
  const auto doc = KvDocument::load(path);
  LoadedModel m;
  models::ModelConfig config;
  try {
    config = models::ModelConfig::read(doc);
    m.norm = bench::Normalization::read(doc);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Usage) throw;
    throw_data(path.string() + ": " + e.what());
  }
  m.model = models::make_model(config);
  m.name = models::architecture_name(config.architecture);
  m.config_hash = model_document_hash(doc);
  const auto saved = nc::load_checkpoint(model_dir / kCheckpointName);
  auto& params = m.model->params();
  if (saved.size() != params.size()) {
    throw_data(model_dir.string() + ": checkpoint has " + std::to_string(saved.size()) +
               " parameters, model expects " + std::to_string(params.size()));
  }
  try {
    params.assign_values(saved);
  } catch (const Error& e) {
    throw_data(model_dir.string() + ": " + e.what());
  }
  return m;
}

std::vector<bench::EvalReport> run_eval(const Resolved& cfg,
                                        const std::vector<fs::path>& model_dirs,
                                        const fs::path& cache_dir, const fs::path& out_dir,
                                        const Log& log) {
  log("root seed " + std::to_string(cfg.seed));
  signal::WindowGeometry geom;
  const auto test_set = load_split(cache_dir, "test", &geom);
  if (test_set.empty()) throw_data("test split is empty");

  std::vector<bench::EvalReport> reports;
  std::vector<std::string> names;
  for (const auto& dir : model_dirs) {
    auto m = load_model(dir);
    check_geometry(geom, m.model->config(), dir.string());
    check_rpm(test_set, m.model->config());
    std::string name = m.name;
    for (int k = 2; std::find(names.begin(), names.end(), name) != names.end(); ++k) {
      name = m.name + "_" + std::to_string(k);
    }
    names.push_back(name);
    const auto start = std::chrono::steady_clock::now();
    auto report = bench::evaluate(*m.model, test_set, m.norm, name);
    report.config_hash = m.config_hash;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    reports.push_back(std::move(report));
  }
  if (cfg.include_persistence) reports.push_back(bench::evaluate_persistence(test_set));

  ensure_dir(out_dir);
  bench::write_reports(out_dir, reports);
  write_resolved(cfg, out_dir);
  for (const auto& r : reports) log(rmse_line(r));
  return reports;
}

Forecast run_forecast(const Resolved& cfg, const fs::path& model_dir, const fs::path& csv,
                      std::size_t offset, const Log& log) {
  auto m = load_model(model_dir);
  const auto& mc = m.model->config();
  const auto at = signal::downsample(read_recording(csv, cfg.csv), cfg.block);
  if (offset < mc.in_len) {
    throw_data("offset " + std::to_string(offset) + " leaves less than " +
               std::to_string(mc.in_len) + " samples of history");
  }
  if (offset > at.size()) {
    throw_data("offset " + std::to_string(offset) + " is past the end of the recording (" +
               std::to_string(at.size()) + " samples)");
  }
  signal::WindowPair w;
  const auto first = static_cast<std::ptrdiff_t>(offset - mc.in_len);
  w.input.assign(at.values.begin() + first, at.values.begin() + static_cast<std::ptrdiff_t>(offset));
  if (mc.use_rpm) {
    if (!at.rpm_values) throw_data(csv.string() + ": model uses rpm but the recording has none");
    w.input_rpm.emplace(at.rpm_values->begin() + first,
                        at.rpm_values->begin() + static_cast<std::ptrdiff_t>(offset));
  }
  const std::vector<signal::WindowPair> one{w};
  const std::size_t row = 0;
  const auto batch = bench::make_batch(one, std::span(&row, 1), m.norm, mc.use_rpm, false);
  const auto pred = m.model->predict(batch);

  Forecast f;
  for (std::size_t t = 0; t < mc.out_len; ++t) f.values.push_back(m.norm.pressure.invert(pred.at(0, t)));
  f.alerts = signal::alert_scan(f.values, cfg.alert_threshold);
  for (std::size_t t = 0; t < f.values.size(); ++t) {
    log("+" + std::to_string((t + 1) * 10) + "s " + format_double(f.values[t]));
  }
  for (const auto& [a, b] : f.alerts) {
    log("alert: steps " + std::to_string(a + 1) + "-" + std::to_string(b + 1) + " below " +
        format_double(cfg.alert_threshold) + " mmHg");
  }
  return f;
}

std::vector<bench::EvalReport> run_report(const Resolved& cfg,
                                          const std::vector<fs::path>& report_dirs,
                                          const fs::path& out_dir, const Log& log) {
  std::vector<bench::EvalReport> all;
  for (const auto& dir : report_dirs) {
    const auto path = dir / "table.csv";
    std::ifstream in(path);
    if (!in) throw_io("cannot open " + path.string());
    for (auto& r : bench::read_table(in)) {
      const bool seen = std::any_of(all.begin(), all.end(),
                                    [&](const bench::EvalReport& x) { return x.model == r.model; });
      if (seen) {
        log("skipping duplicate model '" + r.model + "' from " + dir.string());
        continue;
      }
      all.push_back(std::move(r));
    }
  }
  ensure_dir(out_dir);
  {
    std::ofstream t(out_dir / "table.csv", std::ios::binary);
    bench::write_table(t, all);
    std::ofstream s(out_dir / "summary.csv", std::ios::binary);
    bench::write_summary(s, all);
    if (!t || !s) throw_io("cannot write report files in " + out_dir.string());
  }
  write_resolved(cfg, out_dir);
  for (const auto& r : all) log(rmse_line(r));
  return all;
}

}  // namespace mapcast::pipeline
