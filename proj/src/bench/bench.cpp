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

#include "bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "numeric/ops.hpp"
#include "numeric/optim.hpp"

namespace mapcast::bench {

namespace {

constexpr std::size_t kEvalChunk = 256;

/// Sum that does not depend on the order of its inputs: values are sorted and
/// then added with Neumaier compensation.
double ordered_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = s + x;
    comp += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + comp;
}

Normalizer fit_channel(const std::vector<double>& values) {
  Normalizer n;
  double sum = 0.0;
  for (double v : values) sum += v;
  n.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - n.mean) * (v - n.mean);
  n.sd = std::sqrt(ss / static_cast<double>(values.size()));
  return n;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::size_t label_index(signal::TrendLabel label) { return static_cast<std::size_t>(label); }

}  // namespace

// ---------------------------------------------------------------------------
// normalization

void Normalization::write(KvDocument& doc, const std::string& prefix) const {
  doc.add(prefix + "pressure_mean", format_double(pressure.mean));
  doc.add(prefix + "pressure_sd", format_double(pressure.sd));
  if (rpm) {
    doc.add(prefix + "rpm_mean", format_double(rpm->mean));
    doc.add(prefix + "rpm_sd", format_double(rpm->sd));
  }
}

Normalization Normalization::read(const KvDocument& doc, const std::string& prefix) {
  auto need = [&](const std::string& key) {
    auto v = doc.get(prefix + key);
    if (!v) throw_data("model description lacks " + prefix + key);
    return parse_double(*v, prefix + key);
  };
  Normalization n;
  n.pressure.mean = need("pressure_mean");
  n.pressure.sd = need("pressure_sd");
  if (doc.get(prefix + "rpm_mean")) n.rpm = Normalizer{need("rpm_mean"), need("rpm_sd")};
  if (!(n.pressure.sd > 0.0)) throw_data(prefix + "pressure_sd must be positive");
  return n;
}

Normalization normalize_fit(std::span<const WindowPair> train) {
  if (train.empty()) throw_data("normalize_fit: empty training set");
  std::vector<double> p, r;
  bool all_rpm = true;
  for (const auto& w : train) {
    p.insert(p.end(), w.input.begin(), w.input.end());
    p.insert(p.end(), w.target.begin(), w.target.end());
    if (w.input_rpm) {
      r.insert(r.end(), w.input_rpm->begin(), w.input_rpm->end());
    } else {
      all_rpm = false;
    }
  }
  Normalization n;
  n.pressure = fit_channel(p);
  if (!(n.pressure.sd > 0.0)) {
    throw_data("normalize_fit: training pressures have zero variance");
  }
  if (all_rpm && !r.empty()) {
    n.rpm = fit_channel(r);
    if (!(n.rpm->sd > 0.0)) n.rpm->sd = 1.0;
  }
  return n;
}

models::Batch make_batch(std::span<const WindowPair> windows, std::span<const std::size_t> rows,
                         const Normalization& norm, bool use_rpm, bool with_targets) {
  if (rows.empty()) throw_data("make_batch: no rows");
  const std::size_t in = windows[rows[0]].input.size();
  const std::size_t out = windows[rows[0]].target.size();
  models::Batch b;
  b.inputs = nc::Tensor({rows.size(), in});
  if (use_rpm) {
    if (!norm.rpm) throw_data("model uses motor speed but the normalization has no rpm channel");
    b.input_rpm = nc::Tensor({rows.size(), in});
  }
  if (with_targets) b.targets = nc::Tensor({rows.size(), out});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& w = windows[rows[i]];
    if (w.input.size() != in || w.target.size() != out) {
      throw_data("make_batch: windows have inconsistent geometry");
    }
    for (std::size_t t = 0; t < in; ++t) b.inputs.at(i, t) = norm.pressure.apply(w.input[t]);
    if (use_rpm) {
      if (!w.input_rpm) throw_data("window " + w.recording_id + "@" + std::to_string(w.offset) +
                                   " has no motor speed channel");
      for (std::size_t t = 0; t < in; ++t) b.input_rpm->at(i, t) = norm.rpm->apply((*w.input_rpm)[t]);
    }
    if (with_targets) {
      for (std::size_t t = 0; t < out; ++t) b.targets->at(i, t) = norm.pressure.apply(w.target[t]);
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// training configuration

std::string decay_policy_name(DecayPolicy p) {
  switch (p) {
    case DecayPolicy::Plateau: return "plateau";
    case DecayPolicy::PerEpoch: return "per-epoch";
    case DecayPolicy::None: return "none";
  }
  return "plateau";
}

DecayPolicy parse_decay_policy(std::string_view s) {
  if (s == "plateau") return DecayPolicy::Plateau;
  if (s == "per-epoch") return DecayPolicy::PerEpoch;
  if (s == "none") return DecayPolicy::None;
  throw_usage("train.decay_policy: expected plateau, per-epoch or none, got '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw_usage("train.batch_size must be >= 1");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw_usage("train.decay_factor must be in (0, 1]");
  if (!(learning_rate > 0.0)) throw_usage("train.learning_rate must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw_usage("train.rho must be in [0, 1)");
  if (!(epsilon > 0.0)) throw_usage("train.epsilon must be positive");
  if (plateau_patience < 1) throw_usage("train.plateau_patience must be >= 1");
  if (early_stop_patience < 1) throw_usage("train.early_stop_patience must be >= 1");
}

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> k = {
      "learning_rate", "decay_factor", "decay_policy", "plateau_patience", "batch_size",
      "max_epochs",    "early_stop_patience", "max_steps", "rho", "epsilon", "seed"};
  return k;
}

void TrainConfig::write(KvDocument& doc, const std::string& p) const {
  doc.add(p + "learning_rate", format_double(learning_rate));
  doc.add(p + "decay_factor", format_double(decay_factor));
  doc.add(p + "decay_policy", decay_policy_name(decay_policy));
  doc.add(p + "plateau_patience", std::to_string(plateau_patience));
  doc.add(p + "batch_size", std::to_string(batch_size));
  doc.add(p + "max_epochs", std::to_string(max_epochs));
  doc.add(p + "early_stop_patience", std::to_string(early_stop_patience));
  doc.add(p + "max_steps", std::to_string(max_steps));
  doc.add(p + "rho", format_double(rho));
  doc.add(p + "epsilon", format_double(epsilon));
  doc.add(p + "seed", std::to_string(seed));
}

TrainConfig TrainConfig::read(const KvDocument& doc, const std::string& p) {
  TrainConfig c;
  auto count = [&](const char* key, std::size_t& dst) {
    if (auto v = doc.get(p + key)) {
      const auto n = parse_int(*v, p + key);
      if (n < 0) throw_usage(p + key + " must be >= 0");
      dst = static_cast<std::size_t>(n);
    }
  };
  auto real = [&](const char* key, double& dst) {
    if (auto v = doc.get(p + key)) dst = parse_double(*v, p + key);
  };
  real("learning_rate", c.learning_rate);
  real("decay_factor", c.decay_factor);
  if (auto v = doc.get(p + "decay_policy")) c.decay_policy = parse_decay_policy(*v);
  count("plateau_patience", c.plateau_patience);
  count("batch_size", c.batch_size);
  count("max_epochs", c.max_epochs);
  count("early_stop_patience", c.early_stop_patience);
  count("max_steps", c.max_steps);
  real("rho", c.rho);
  real("epsilon", c.epsilon);
  if (auto v = doc.get(p + "seed")) c.seed = parse_u64(*v, p + "seed");
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// training

double normalized_loss(models::Model& model, std::span<const WindowPair> windows,
                       const Normalization& norm) {
  if (windows.empty()) throw_data("normalized_loss: empty window set");
  const bool use_rpm = model.config().use_rpm;
  std::vector<double> per_window;
  per_window.reserve(windows.size());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < windows.size(); start += kEvalChunk) {
    const std::size_t end = std::min(windows.size(), start + kEvalChunk);
    rows.clear();
    for (std::size_t i = start; i < end; ++i) rows.push_back(i);
    const auto batch = make_batch(windows, rows, norm, use_rpm, true);
    const auto pred = model.predict(batch);
    const std::size_t out = pred.dim(1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double se = 0.0;
      for (std::size_t t = 0; t < out; ++t) {
        const double e = pred.at(i, t) - batch.targets->at(i, t);
        se += e * e;
      }
      per_window.push_back(se);
    }
  }
  const double points = static_cast<double>(windows.size() * windows[0].target.size());
  return ordered_sum(std::move(per_window)) / points;
}

History train(models::Model& model, std::span<const WindowPair> train_set,
              std::span<const WindowPair> holdout_set, const Normalization& norm,
              const TrainConfig& config) {
  config.validate();
  History history;
  auto& params = model.params();
  if (params.empty() || config.max_epochs == 0) return history;
  if (train_set.empty()) throw_data("train: empty training set");

  const bool use_rpm = model.config().use_rpm;
  const auto monitor = [&] {
    return holdout_set.empty() ? normalized_loss(model, train_set, norm)
                               : normalized_loss(model, holdout_set, norm);
  };

  auto state = nc::RmspropState::for_params(params, config.learning_rate, config.rho,
                                            config.epsilon);
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng coin_rng(derive_seed(config.seed, "teacher-forcing"));
  models::ForwardOptions opts;
  opts.teacher_forcing = model.config().teacher_forcing;
  opts.rng = &coin_rng;

  nc::ParameterSet best_params = params;
  double best = monitor();
  std::size_t since_best = 0, plateau = 0;
  double lr = config.learning_rate;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  bool budget_spent = false;
  for (std::size_t epoch = 1; epoch <= config.max_epochs && !budget_spent; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    std::size_t seen = 0, batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const auto batch = make_batch(train_set, rows, norm, use_rpm, true);
      params.zero_grad();
      nc::Tape tape;
      double loss_value = 0.0;
      try {
        const auto pred = model.forward(tape, batch, opts);
        const auto loss = nc::mse_loss(pred, tape.constant(*batch.targets));
        loss_value = loss.value()[0];
        if (!std::isfinite(loss_value)) {
          throw_numeric("non-finite training loss");
        }
        tape.backward(loss);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numeric) throw;
        throw Error(ErrorKind::Numeric, std::string(e.what()) + " at epoch " +
                                            std::to_string(epoch) + " batch " +
                                            std::to_string(batch_index));
      }
      state.learning_rate = lr;
      nc::rmsprop_step(params, state);
      loss_sum += loss_value * static_cast<double>(rows.size());
      seen += rows.size();
      ++history.steps;
      if (config.max_steps && history.steps >= config.max_steps) {
        budget_spent = true;
        break;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.lr = lr;
    const double current = monitor();
    if (!std::isfinite(current)) {
      throw_numeric("non-finite monitored loss after epoch " + std::to_string(epoch));
    }
    if (!holdout_set.empty()) rec.holdout_loss = current;
    history.epochs.push_back(rec);

    if (current < best) {
      best = current;
      best_params = params;
      history.best_epoch = epoch;
      since_best = 0;
      plateau = 0;
    } else {
      ++since_best;
      ++plateau;
    }
    if (config.decay_policy == DecayPolicy::PerEpoch) {
      lr *= config.decay_factor;
    } else if (config.decay_policy == DecayPolicy::Plateau && plateau >= config.plateau_patience) {
      lr *= config.decay_factor;
      plateau = 0;
    }
    if (since_best >= config.early_stop_patience) break;
  }
  params.assign_values(best_params);
  return history;
}

// ---------------------------------------------------------------------------
// evaluation

double rmse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw_data("rmse: length mismatch (" + std::to_string(pred.size()) + " vs " +
               std::to_string(target.size()) + ")");
  }
  if (pred.empty()) throw_data("rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

std::vector<double> persistence_baseline(std::span<const double> input, std::size_t horizon) {
  if (input.empty()) throw_data("persistence_baseline: empty input");
  return std::vector<double>(horizon, input.back());
}

const char* category_name(Category c) {
  switch (c) {
    case Category::I: return "I";
    case Category::D: return "D";
    case Category::S: return "S";
    case Category::IDS: return "I-D-S";
  }
  return "?";
}

void score(EvalReport& report) {
  std::array<std::vector<double>, 4> sse;
  std::array<std::size_t, 4> windows{}, points{};
  for (const auto& p : report.predictions) {
    double se = 0.0;
    for (std::size_t t = 0; t < p.truth.size(); ++t) se += (p.pred[t] - p.truth[t]) * (p.pred[t] - p.truth[t]);
    for (std::size_t k : {label_index(p.label), static_cast<std::size_t>(Category::IDS)}) {
      sse[k].push_back(se);
      ++windows[k];
      points[k] += p.truth.size();
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (windows[k] == 0) {
      report.categories[k].reset();
      continue;
    }
    CategoryResult r;
    r.windows = windows[k];
    r.rmse = std::sqrt(ordered_sum(std::move(sse[k])) / static_cast<double>(points[k]));
    report.categories[k] = r;
  }
}

EvalReport evaluate(models::Model& model, std::span<const WindowPair> windows,
                    const Normalization& norm, const std::string& name) {
  EvalReport report;
  report.model = name;
  const bool use_rpm = model.config().use_rpm;
  const bool needs_targets = model.config().architecture == models::Architecture::Oracle;
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < windows.size(); start += kEvalChunk) {
    const std::size_t end = std::min(windows.size(), start + kEvalChunk);
    rows.clear();
    for (std::size_t i = start; i < end; ++i) rows.push_back(i);
    const auto batch = make_batch(windows, rows, norm, use_rpm, needs_targets);
    const auto pred = model.predict(batch);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& w = windows[rows[i]];
      if (pred.dim(1) != w.target.size()) {
        throw_data("evaluate: model horizon " + std::to_string(pred.dim(1)) +
                   " does not match window horizon " + std::to_string(w.target.size()));
      }
      WindowPrediction p{w.recording_id, w.offset, w.label, w.target, {}};
      p.pred.resize(w.target.size());
      for (std::size_t t = 0; t < p.pred.size(); ++t) p.pred[t] = norm.pressure.invert(pred.at(i, t));
      report.predictions.push_back(std::move(p));
    }
  }
  score(report);
  return report;
}

EvalReport evaluate_persistence(std::span<const WindowPair> windows, const std::string& name) {
  EvalReport report;
  report.model = name;
  for (const auto& w : windows) {
    report.predictions.push_back(
        {w.recording_id, w.offset, w.label, w.target, persistence_baseline(w.input, w.target.size())});
  }
  score(report);
  return report;
}

// ---------------------------------------------------------------------------
// holdout search

std::string describe(const models::ModelConfig& c) {
  auto join = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "x" : "") + std::to_string(v[i]);
    return s;
  };
  std::string s = models::architecture_name(c.architecture);
  switch (c.architecture) {
    case models::Architecture::Dnn: s += " hidden=" + join(c.dnn_hidden); break;
    case models::Architecture::Seq2Seq:
    case models::Architecture::Seq2SeqAttn: s += " hidden=" + std::to_string(c.rnn_hidden); break;
    case models::Architecture::LmuRnn:
      s += " order=" + std::to_string(c.lmu_order) + " theta=" + format_double(c.lmu_theta) +
           " hidden=" + std::to_string(c.lmu_hidden);
      break;
    case models::Architecture::Tcn:
      s += " channels=" + std::to_string(c.tcn_channels) + " kernel=" + std::to_string(c.tcn_kernel) +
           " dilations=" + join(c.tcn_dilations) + " dense=" + std::to_string(c.tcn_dense);
      break;
    default: break;
  }
  if (c.use_rpm) s += " +rpm";
  return s;
}

SearchResult holdout_search(const std::vector<models::ModelConfig>& grid,
                            std::span<const WindowPair> train_set,
                            std::span<const WindowPair> holdout_set, const Normalization& norm,
                            const TrainConfig& config) {
  if (grid.empty()) throw_usage("holdout_search: empty grid");
  if (holdout_set.empty()) throw_data("holdout_search: empty holdout set");
  SearchResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string desc = describe(grid[i]);
    try {
      auto model = models::make_model(grid[i]);
      train(*model, train_set, holdout_set, norm, config);
      const auto report = evaluate(*model, holdout_set, norm, desc);
      const double r = report.at(Category::IDS)->rmse;
      result.leaderboard.push_back({i, desc, r});
      if (r < best) {
        best = r;
        result.best = i;
        result.best_model = std::move(model);
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "candidate " + std::to_string(i) + " (" + desc + "): " + e.what());
    }
  }
  std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(),
                   [](const auto& a, const auto& b) { return a.holdout_rmse < b.holdout_rmse; });
  return result;
}

// ---------------------------------------------------------------------------
// reports

TrainConfig probe_train_config(models::Architecture arch, std::uint64_t seed) {
  TrainConfig c;
  // the DNN diverges into a worse basin at the larger step
  c.learning_rate = arch == models::Architecture::Dnn ? 3e-3 : 1e-2;
  c.batch_size = 8;
  c.max_epochs = 2000;
  c.max_steps = 2000;
  c.plateau_patience = 150;
  c.early_stop_patience = c.max_epochs;
  c.seed = seed;
  return c;
}

ProbeResult overfit_probe(const models::ModelConfig& config, std::span<const WindowPair> windows,
                          const TrainConfig& train_config) {
  const auto start = std::chrono::steady_clock::now();
  const auto norm = normalize_fit(windows);
  auto model = models::make_model(config);
  ProbeResult r;
  r.steps = train(*model, windows, {}, norm, train_config).steps;
  r.train_rmse = evaluate(*model, windows, norm, "probe").at(Category::IDS)->rmse;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_table(std::ostream& out, std::span<const EvalReport> reports) {
  out << "model,category,rmse_mmhg,window_count\n";
  for (const auto& r : reports)
    for (auto c : kCategories)
      if (const auto& res = r.at(c)) {
        out << csv_field(r.model) << ',' << category_name(c) << ',' << format_double(res->rmse)
            << ',' << res->windows << '\n';
      }
}

void write_summary(std::ostream& out, std::span<const EvalReport> reports) {
  out << "model,I,D,S,I-D-S\n";
  for (const auto& r : reports) {
    out << csv_field(r.model);
    for (auto c : kCategories) {
      out << ',';
      if (const auto& res = r.at(c)) out << format_double(res->rmse);
    }
    out << '\n';
  }
}

void write_step_table(std::ostream& out, std::span<const EvalReport> reports) {
  out << "model,category,step,rmse_mmhg\n";
  for (const auto& r : reports) {
    if (r.predictions.empty()) continue;
    const std::size_t horizon = r.predictions[0].truth.size();
    for (auto c : kCategories) {
      if (!r.at(c)) continue;
      for (std::size_t t = 0; t < horizon; ++t) {
        std::vector<double> sq;
        for (const auto& p : r.predictions) {
          if (c != Category::IDS && label_index(p.label) != static_cast<std::size_t>(c)) continue;
          sq.push_back((p.pred[t] - p.truth[t]) * (p.pred[t] - p.truth[t]));
        }
        const double n = static_cast<double>(sq.size());
        out << csv_field(r.model) << ',' << category_name(c) << ',' << (t + 1) << ','
            << format_double(std::sqrt(ordered_sum(std::move(sq)) / n)) << '\n';
      }
    }
  }
}

void write_traces(std::ostream& out, const EvalReport& report) {
  out << "recording_id,offset,step,truth_mmhg,pred_mmhg\n";
  for (const auto& p : report.predictions)
    for (std::size_t t = 0; t < p.truth.size(); ++t) {
      out << csv_field(p.recording_id) << ',' << p.offset << ',' << (t + 1) << ','
          << format_double(p.truth[t]) << ',' << format_double(p.pred[t]) << '\n';
    }
}

void write_history(std::ostream& out, const History& history) {
  out << "epoch,train_loss,holdout_loss,lr\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << format_double(e.train_loss) << ',';
    if (e.holdout_loss) out << format_double(*e.holdout_loss);
    out << ',' << format_double(e.lr) << '\n';
  }
}

void write_reports(const std::filesystem::path& dir, std::span<const EvalReport> reports) {
  auto emit = [](const std::filesystem::path& path, const auto& fn) {
    std::ostringstream s;
    fn(s);
    write_text_file(path, s.str());
  };
  std::error_code ec;
  std::filesystem::create_directories(dir / "traces", ec);
  if (ec) throw_io("cannot create " + (dir / "traces").string() + ": " + ec.message());
  emit(dir / "table.csv", [&](std::ostream& s) { write_table(s, reports); });
  emit(dir / "summary.csv", [&](std::ostream& s) { write_summary(s, reports); });
  emit(dir / "per_step.csv", [&](std::ostream& s) { write_step_table(s, reports); });
  for (const auto& r : reports) {
    if (r.predictions.empty()) continue;
    emit(dir / "traces" / (r.model + ".csv"), [&](std::ostream& s) { write_traces(s, r); });
  }
}

std::vector<EvalReport> read_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "model,category,rmse_mmhg,window_count") {
    throw_data("report table: unexpected header");
  }
  std::vector<EvalReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_list(line);
    if (f.size() != 4) throw_data("report table: malformed row at line " + std::to_string(line_no));
    if (reports.empty() || reports.back().model != f[0]) {
      reports.emplace_back();
      reports.back().model = f[0];
    }
    std::size_t k = 4;
    for (auto c : kCategories)
      if (f[1] == category_name(c)) k = static_cast<std::size_t>(c);
    if (k == 4) throw_data("report table: unknown category '" + f[1] + "' at line " + std::to_string(line_no));
    const auto windows = parse_int(f[3], "window_count");
    if (windows < 0) throw_data("report table: negative window count at line " + std::to_string(line_no));
    reports.back().categories[k] =
        CategoryResult{parse_double(f[2], "rmse_mmhg"), static_cast<std::size_t>(windows)};
  }
  return reports;
}

}  // namespace mapcast::bench
