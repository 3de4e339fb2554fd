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

// mapcast command line. Talks to the library only through the C interface.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mapcast/mapcast.h"

namespace {

void print_line(const char* line, void*) { std::printf("%s\n", line); }

int report_failure(mapcast_status status) {
  std::fprintf(stderr, "error: %s\n", mapcast_last_error());
  return static_cast<int>(status);
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

struct Globals {
  std::string config_path;
  std::vector<std::string> sets;
  std::string seed;
  bool deterministic = false;
  std::string out;
};

mapcast_status build_config(const Globals& g, mapcast_config* cfg) {
  mapcast_status st = MAPCAST_OK;
  if (!g.config_path.empty()) {
    st = mapcast_config_load(cfg, g.config_path.c_str());
    if (st != MAPCAST_OK) return st;
  }
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return MAPCAST_ERR_USAGE;
    }
    st = mapcast_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != MAPCAST_OK) return st;
  }
  if (!g.seed.empty()) {
    st = mapcast_config_set(cfg, "seed", g.seed.c_str());
    if (st != MAPCAST_OK) return st;
  }
  if (g.deterministic) st = mapcast_config_set(cfg, "deterministic", "true");
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean aortic pressure forecasting: synthesize, prepare, train, evaluate."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(mapcast_version()));

  Globals g;
  app.add_option("--config", g.config_path, "Key-value configuration file");
  app.add_option("--set", g.sets, "Override one configuration key (key=value)")
      ->allow_extra_args(false);
  app.add_option("--seed", g.seed, "Root seed for every random stream");
  app.add_flag("--deterministic", g.deterministic, "Pin reduction order and disable threading");
  app.add_option("--out", g.out, "Output directory");

  auto* synth = app.add_subcommand("synth", "Write a synthetic recording corpus");

  std::string recordings;
  auto* prepare = app.add_subcommand("prepare", "Downsample, window, label and split recordings");
  prepare->add_option("recordings", recordings, "Directory of recording CSV files")->required();

  std::string cache;
  bool probe = false;
  auto* train = app.add_subcommand("train", "Train one model on a prepared cache");
  train->add_option("cache", cache, "Prepared window cache directory")->required();
  train->add_flag("--probe", probe, "Overfit a few training windows instead");

  std::vector<std::string> model_dirs;
  auto* eval = app.add_subcommand("eval", "Score trained models on the test split");
  eval->add_option("cache", cache, "Prepared window cache directory")->required();
  eval->add_option("models", model_dirs, "Model directories")->required();

  std::string model_dir, csv;
  std::size_t offset = 0;
  auto* forecast = app.add_subcommand("forecast", "Forecast one recording from a given offset");
  forecast->add_option("model", model_dir, "Model directory")->required();
  forecast->add_option("recording", csv, "Recording CSV file")->required();
  forecast->add_option("--at", offset, "Downsampled index the forecast starts from")->required();

  std::vector<std::string> report_dirs;
  auto* report = app.add_subcommand("report", "Merge evaluation tables into one report");
  report->add_option("reports", report_dirs, "Evaluation output directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : MAPCAST_ERR_USAGE;
  }

  const bool needs_out = !forecast->parsed();
  if (needs_out && g.out.empty()) {
    std::fprintf(stderr, "error: --out is required for this command\n");
    return MAPCAST_ERR_USAGE;
  }

  mapcast_config* cfg = nullptr;
  mapcast_status st = mapcast_config_create(&cfg);
  if (st == MAPCAST_OK) st = build_config(g, cfg);
  if (st != MAPCAST_OK) {
    const int code = report_failure(st);
    mapcast_config_destroy(cfg);
    return code;
  }

  const char* out = g.out.c_str();
  if (synth->parsed()) {
    st = mapcast_synth(cfg, out, print_line, nullptr);
  } else if (prepare->parsed()) {
    st = mapcast_prepare(cfg, recordings.c_str(), out, print_line, nullptr);
  } else if (train->parsed()) {
    st = mapcast_train(cfg, cache.c_str(), out, probe ? 1 : 0, nullptr, print_line, nullptr);
  } else if (eval->parsed()) {
    const auto dirs = c_strings(model_dirs);
    st = mapcast_eval(cfg, dirs.data(), dirs.size(), cache.c_str(), out, print_line, nullptr);
  } else if (forecast->parsed()) {
    std::size_t count = 0;
    st = mapcast_forecast(cfg, model_dir.c_str(), csv.c_str(), offset, nullptr, 0, &count,
                          print_line, nullptr);
  } else if (report->parsed()) {
    const auto dirs = c_strings(report_dirs);
    st = mapcast_report(cfg, dirs.data(), dirs.size(), out, print_line, nullptr);
  }
  mapcast_config_destroy(cfg);
  return st == MAPCAST_OK ? 0 : report_failure(st);
}
