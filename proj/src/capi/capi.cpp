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

#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "mapcast/mapcast.h"
#include "pipeline/pipeline.hpp"

struct mapcast_config {
  mapcast::pipeline::RunConfig run;
};

struct mapcast_model {
  mapcast::pipeline::LoadedModel loaded;
};

namespace {

thread_local std::string g_last_error;

mapcast_status fail(mapcast_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
mapcast_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return MAPCAST_OK;
  } catch (const mapcast::Error& e) {
    return fail(static_cast<mapcast_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MAPCAST_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MAPCAST_ERR_DATA, "out of memory");
  } catch (const std::exception& e) {
    return fail(MAPCAST_ERR_DATA, e.what());
  }
}

mapcast::pipeline::Log logger(mapcast_log_fn fn, void* user) {
  return [fn, user](const std::string& line) {
    if (fn) fn(line.c_str(), user);
  };
}

void require(const void* p, const char* what) {
  if (!p) mapcast::throw_usage(std::string(what) + " is null");
}

std::vector<std::filesystem::path> paths(const char* const* items, std::size_t n) {
  if (n) require(items, "directory list");
  std::vector<std::filesystem::path> out;
  for (std::size_t i = 0; i < n; ++i) {
    require(items[i], "directory");
    out.emplace_back(items[i]);
  }
  return out;
}

}  // namespace

extern "C" {

const char* mapcast_version(void) { return "0.1.0"; }

const char* mapcast_last_error(void) { return g_last_error.c_str(); }

mapcast_status mapcast_config_create(mapcast_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new mapcast_config();
  });
}

void mapcast_config_destroy(mapcast_config* config) { delete config; }

mapcast_status mapcast_config_load(mapcast_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    config->run.load(path);
  });
}

mapcast_status mapcast_config_set(mapcast_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->run.set(key, value);
  });
}

mapcast_status mapcast_config_resolved(const mapcast_config* config, char* buffer,
                                       size_t capacity, size_t* needed) {
  return guarded([&] {
    require(config, "config");
    const auto text = config->run.resolve().document().to_string();
    if (needed) *needed = text.size() + 1;
    if (buffer && capacity) {
      const std::size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
    }
  });
}

mapcast_status mapcast_synth(const mapcast_config* config, const char* out_dir,
                             mapcast_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    mapcast::pipeline::run_synth(config->run.resolve(), out_dir, logger(log, user));
  });
}

mapcast_status mapcast_prepare(const mapcast_config* config, const char* recordings_dir,
                               const char* out_dir, mapcast_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(recordings_dir, "recordings_dir");
    require(out_dir, "out_dir");
    mapcast::pipeline::run_prepare(config->run.resolve(), recordings_dir, out_dir,
                                   logger(log, user));
  });
}

mapcast_status mapcast_train(const mapcast_config* config, const char* cache_dir,
                             const char* out_dir, int probe, double* probe_rmse,
                             mapcast_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(cache_dir, "cache_dir");
    require(out_dir, "out_dir");
    const auto s = mapcast::pipeline::run_train(config->run.resolve(), cache_dir, out_dir,
                                                probe != 0, logger(log, user));
    if (probe_rmse && s.probe) *probe_rmse = s.probe->train_rmse;
  });
}

mapcast_status mapcast_eval(const mapcast_config* config, const char* const* model_dirs,
                            size_t model_count, const char* cache_dir, const char* out_dir,
                            mapcast_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(cache_dir, "cache_dir");
    require(out_dir, "out_dir");
    mapcast::pipeline::run_eval(config->run.resolve(), paths(model_dirs, model_count), cache_dir,
                                out_dir, logger(log, user));
  });
}

mapcast_status mapcast_forecast(const mapcast_config* config, const char* model_dir,
                                const char* csv_path, size_t offset, double* values,
                                size_t capacity, size_t* count, mapcast_log_fn log, void* user) {
  return guarded([&] {
    require(config, "config");
    require(model_dir, "model_dir");
    require(csv_path, "csv_path");
    const auto f = mapcast::pipeline::run_forecast(config->run.resolve(), model_dir, csv_path,
                                                   offset, logger(log, user));
    if (count) *count = f.values.size();
    if (values) {
      for (std::size_t i = 0; i < std::min(capacity, f.values.size()); ++i) values[i] = f.values[i];
    }
  });
}

mapcast_status mapcast_report(const mapcast_config* config, const char* const* report_dirs,
                              size_t dir_count, const char* out_dir, mapcast_log_fn log,
                              void* user) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    mapcast::pipeline::run_report(config->run.resolve(), paths(report_dirs, dir_count), out_dir,
                                  logger(log, user));
  });
}

mapcast_status mapcast_model_load(const char* model_dir, mapcast_model** out) {
  return guarded([&] {
    require(model_dir, "model_dir");
    require(out, "out");
    auto m = std::make_unique<mapcast_model>();
    m->loaded = mapcast::pipeline::load_model(model_dir);
    *out = m.release();
  });
}

void mapcast_model_destroy(mapcast_model* model) { delete model; }

mapcast_status mapcast_model_geometry(const mapcast_model* model, size_t* in_len,
                                      size_t* out_len, int* uses_rpm) {
  return guarded([&] {
    require(model, "model");
    const auto& c = model->loaded.model->config();
    if (in_len) *in_len = c.in_len;
    if (out_len) *out_len = c.out_len;
    if (uses_rpm) *uses_rpm = c.use_rpm ? 1 : 0;
  });
}

mapcast_status mapcast_model_predict(mapcast_model* model, const double* pressure,
                                     const double* rpm, size_t in_len, double* out,
                                     size_t out_len) {
  return guarded([&] {
    require(model, "model");
    require(pressure, "pressure");
    require(out, "out");
    auto& m = model->loaded;
    const auto& c = m.model->config();
    if (in_len != c.in_len || out_len != c.out_len) {
      mapcast::throw_data("window geometry " + std::to_string(in_len) + "/" +
                          std::to_string(out_len) + " does not match model geometry " +
                          std::to_string(c.in_len) + "/" + std::to_string(c.out_len));
    }
    if (c.use_rpm) require(rpm, "rpm");
    mapcast::signal::WindowPair w;
    w.input.assign(pressure, pressure + in_len);
    if (c.use_rpm) w.input_rpm.emplace(rpm, rpm + in_len);
    const std::vector<mapcast::signal::WindowPair> one{w};
    const std::size_t row = 0;
    const auto batch =
        mapcast::bench::make_batch(one, std::span(&row, 1), m.norm, c.use_rpm, false);
    const auto pred = m.model->predict(batch);
    for (std::size_t t = 0; t < out_len; ++t) out[t] = m.norm.pressure.invert(pred.at(0, t));
  });
}

}  // extern "C"
