/* Copyright 2026 The gkpfloquet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the gkpfloquet experiment runner.
 *
 * Every function returns a gkp_status. On failure the message is available
 * from gkp_last_error() on the calling thread until the next call.
 */

#ifndef GKPFLOQUET_H
#define GKPFLOQUET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GKP_API __declspec(dllexport)
#else
#define GKP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gkp_status {
  GKP_OK = 0,
  GKP_ERR_INVALID_ARGUMENT = 1,
  GKP_ERR_CONFIG = 2,
  GKP_ERR_NUMERICAL = 3,
  GKP_ERR_TRUNCATION = 5,
  GKP_ERR_CONTRACT = 6,
  GKP_ERR_IO = 7,
  GKP_ERR_INTEGRATOR = 8,
  GKP_ERR_DECODER = 9,
  GKP_ERR_INTERNAL = 99
} gkp_status;

typedef struct gkp_config gkp_config;
typedef struct gkp_result gkp_result;

GKP_API const char* gkp_version(void);
GKP_API const char* gkp_last_error(void);

/* Config documents (YAML or JSON). */
GKP_API gkp_status gkp_config_load(const char* path, gkp_config** out);
GKP_API gkp_status gkp_config_parse(const char* text, gkp_config** out);
GKP_API void gkp_config_free(gkp_config* config);
/* "dotted.path=value"; the value is read as YAML. */
GKP_API gkp_status gkp_config_override(gkp_config* config, const char* assignment);
GKP_API gkp_status gkp_config_set_seed(gkp_config* config, uint64_t seed);
GKP_API gkp_status gkp_config_set_output_dir(gkp_config* config, const char* dir);
GKP_API gkp_status gkp_config_set_workers(gkp_config* config, int workers);
/* Resolves and checks the config without running anything. */
GKP_API gkp_status gkp_config_validate(const gkp_config* config);
/* Writes a NUL-terminated string into buf; *needed receives the full size
 * including the terminator. Truncated output still returns GKP_OK. */
GKP_API gkp_status gkp_config_hash(const gkp_config* config, char* buf, size_t size, size_t* needed);
GKP_API gkp_status gkp_config_to_json(const gkp_config* config, char* buf, size_t size, size_t* needed);

/* Runs the configured experiment. A result is produced whenever artifacts
 * were written, including partial runs; check gkp_result_exit_code. */
GKP_API gkp_status gkp_run(const gkp_config* config, gkp_result** out);
GKP_API gkp_status gkp_sweep(const gkp_config* config, const char* axis, const double* values, size_t count,
                             gkp_result** out);
GKP_API gkp_status gkp_run_oracles(const char* output_dir, int workers, gkp_result** out);

/* 0 success, 2 config error, 3 numerical failure, 4 partial. */
GKP_API int gkp_result_exit_code(const gkp_result* result);
GKP_API const char* gkp_result_summary(const gkp_result* result);
GKP_API const char* gkp_result_config_hash(const gkp_result* result);
GKP_API const char* gkp_result_output_dir(const gkp_result* result);
GKP_API size_t gkp_result_point_count(const gkp_result* result);
/* Label and status ("complete" / "failed") of point i; NULL out of range. */
GKP_API const char* gkp_result_point_label(const gkp_result* result, size_t i);
GKP_API const char* gkp_result_point_status(const gkp_result* result, size_t i);
GKP_API const char* gkp_result_point_error(const gkp_result* result, size_t i);
GKP_API void gkp_result_free(gkp_result* result);

/* Exit code for a failing status. */
GKP_API int gkp_exit_code(gkp_status status);

#ifdef __cplusplus
}
#endif

#endif /* GKPFLOQUET_H */
