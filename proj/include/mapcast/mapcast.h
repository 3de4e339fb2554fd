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

/* C interface to the mapcast forecasting library.
 *
 * Every call returns a mapcast_status. On failure the message is available
 * from mapcast_last_error() until the next call on the same thread.
 */
#ifndef MAPCAST_MAPCAST_H_
#define MAPCAST_MAPCAST_H_

#include <stddef.h>

#if defined(_WIN32)
#define MAPCAST_API __declspec(dllexport)
#else
#define MAPCAST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mapcast_status {
  MAPCAST_OK = 0,
  MAPCAST_ERR_USAGE = 1,   /* bad argument or configuration */
  MAPCAST_ERR_DATA = 2,    /* malformed or incompatible data */
  MAPCAST_ERR_NUMERIC = 3, /* non-finite values during training or inference */
  MAPCAST_ERR_IO = 4
} mapcast_status;

typedef struct mapcast_config mapcast_config;
typedef struct mapcast_model mapcast_model;

/* Receives one line of progress output, without the trailing newline. */
typedef void (*mapcast_log_fn)(const char* line, void* user);

MAPCAST_API const char* mapcast_version(void);
MAPCAST_API const char* mapcast_last_error(void);

/* configuration */
MAPCAST_API mapcast_status mapcast_config_create(mapcast_config** out);
MAPCAST_API void mapcast_config_destroy(mapcast_config* config);
MAPCAST_API mapcast_status mapcast_config_load(mapcast_config* config, const char* path);
MAPCAST_API mapcast_status mapcast_config_set(mapcast_config* config, const char* key,
                                              const char* value);
/* Resolved configuration text. Writes at most `capacity` bytes including the
 * terminator; `needed` receives the full size including the terminator. */
MAPCAST_API mapcast_status mapcast_config_resolved(const mapcast_config* config, char* buffer,
                                                   size_t capacity, size_t* needed);

/* commands */
MAPCAST_API mapcast_status mapcast_synth(const mapcast_config* config, const char* out_dir,
                                         mapcast_log_fn log, void* user);
MAPCAST_API mapcast_status mapcast_prepare(const mapcast_config* config,
                                           const char* recordings_dir, const char* out_dir,
                                           mapcast_log_fn log, void* user);
/* With `probe` set, trains on a few training windows only; `probe_rmse`
 * (may be NULL) receives the final training RMSE in mmHg. */
MAPCAST_API mapcast_status mapcast_train(const mapcast_config* config, const char* cache_dir,
                                         const char* out_dir, int probe, double* probe_rmse,
                                         mapcast_log_fn log, void* user);
MAPCAST_API mapcast_status mapcast_eval(const mapcast_config* config,
                                        const char* const* model_dirs, size_t model_count,
                                        const char* cache_dir, const char* out_dir,
                                        mapcast_log_fn log, void* user);
/* Forecast after AT index `offset`. `values` receives up to `capacity`
 * predictions; `count` receives the horizon length. */
MAPCAST_API mapcast_status mapcast_forecast(const mapcast_config* config, const char* model_dir,
                                            const char* csv_path, size_t offset, double* values,
                                            size_t capacity, size_t* count, mapcast_log_fn log,
                                            void* user);
MAPCAST_API mapcast_status mapcast_report(const mapcast_config* config,
                                          const char* const* report_dirs, size_t dir_count,
                                          const char* out_dir, mapcast_log_fn log, void* user);

/* trained models */
MAPCAST_API mapcast_status mapcast_model_load(const char* model_dir, mapcast_model** out);
MAPCAST_API void mapcast_model_destroy(mapcast_model* model);
MAPCAST_API mapcast_status mapcast_model_geometry(const mapcast_model* model, size_t* in_len,
                                                  size_t* out_len, int* uses_rpm);
/* One window in mmHg (and rpm when the model uses it; NULL otherwise). */
MAPCAST_API mapcast_status mapcast_model_predict(mapcast_model* model, const double* pressure,
                                                 const double* rpm, size_t in_len,
                                                 double* out, size_t out_len);

#ifdef __cplusplus
}
#endif

#endif /* MAPCAST_MAPCAST_H_ */
