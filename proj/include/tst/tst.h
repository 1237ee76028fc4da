/*
 * Copyright 2026 The TST Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the time-sparse transducer library.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return a tst_status; on failure tst_last_error() describes the
 * problem for the calling thread.
 */
#ifndef TST_TST_H
#define TST_TST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TST_BUILDING_LIBRARY)
#    define TST_API __declspec(dllexport)
#  else
#    define TST_API __declspec(dllimport)
#  endif
#else
#  define TST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tst_status {
  TST_OK = 0,
  TST_ERR_INVALID_ARGUMENT = 1,
  TST_ERR_DIMENSION = 2,
  TST_ERR_DOMAIN = 3,
  TST_ERR_CONTRACT = 4,
  TST_ERR_EMPTY_INPUT = 5,
  TST_ERR_PARSE = 6,
  TST_ERR_SCHEMA = 7,
  TST_ERR_IO = 8,
  TST_ERR_CHECKPOINT = 9,
  TST_ERR_DIVERGED = 10,
  TST_ERR_CONFIG = 11,
  TST_ERR_BUFFER_TOO_SMALL = 12,
  TST_ERR_INTERNAL = 99
} tst_status;

typedef struct tst_config tst_config;
typedef struct tst_dataset tst_dataset;
typedef struct tst_model tst_model;

/* Evaluation summary; one CSV row in the report file. */
typedef struct tst_eval_report {
  char config_id[17];
  size_t window_length;
  size_t window_stride;
  char strategy[8];
  char decoder[8];
  size_t beam;
  double cer_percent;
  double rtf;
  uint64_t lattice_cells;
  uint64_t joint_calls;
  double wall_ms;
} tst_eval_report;

typedef void (*tst_log_fn)(const char* message, void* user);
typedef void (*tst_check_fn)(const char* name, int passed, const char* detail,
                             void* user);

TST_API const char* tst_version(void);
TST_API const char* tst_status_string(tst_status status);
/* Message for the last failure on this thread; empty if none. */
TST_API const char* tst_last_error(void);

/* Configuration: flat key/value store with typed validation. */
TST_API tst_status tst_config_create(tst_config** out);
TST_API void tst_config_destroy(tst_config* cfg);
TST_API tst_status tst_config_load_file(tst_config* cfg, const char* path);
TST_API tst_status tst_config_set(tst_config* cfg, const char* key,
                                  const char* value);
/* Copies the value into buf; *needed receives the size including NUL. */
TST_API tst_status tst_config_get(const tst_config* cfg, const char* key,
                                  char* buf, size_t cap, size_t* needed);
/* Applies the TST_SEED environment variable, if set. */
TST_API tst_status tst_config_apply_environment(tst_config* cfg);
TST_API size_t tst_config_key_count(void);
TST_API const char* tst_config_key_name(size_t index);

/* Datasets. */
TST_API tst_status tst_dataset_generate(const tst_config* cfg, tst_dataset** out);
TST_API tst_status tst_dataset_load(const char* path, tst_dataset** out);
TST_API tst_status tst_dataset_save(const tst_dataset* data, const char* path);
TST_API size_t tst_dataset_size(const tst_dataset* data);
TST_API const char* tst_dataset_id(const tst_dataset* data, size_t index);
/* Copies the reference labels of utterance `index`. */
TST_API tst_status tst_dataset_labels(const tst_dataset* data, size_t index,
                                      int32_t* labels, size_t cap, size_t* len);
TST_API void tst_dataset_destroy(tst_dataset* data);

/* Models. `initial_loss`/`final_loss` may be NULL. */
TST_API tst_status tst_train(const tst_config* cfg, const tst_dataset* data,
                             tst_log_fn log, void* user, tst_model** out,
                             double* initial_loss, double* final_loss);
TST_API tst_status tst_model_save(const tst_model* model, const char* path);
TST_API tst_status tst_model_load(const tst_config* cfg, const char* path,
                                  tst_model** out);
TST_API void tst_model_destroy(tst_model* model);

/* Decodes utterance `index` with the configured decoder. */
TST_API tst_status tst_decode(const tst_model* model, const tst_config* cfg,
                              const tst_dataset* data, size_t index,
                              int32_t* labels, size_t cap, size_t* len);
TST_API tst_status tst_evaluate(const tst_model* model, const tst_config* cfg,
                                const tst_dataset* data, tst_eval_report* out);
TST_API const char* tst_csv_header(void);
TST_API tst_status tst_report_csv_row(const tst_eval_report* report, char* buf,
                                      size_t cap, size_t* needed);
TST_API tst_status tst_report_append(const tst_eval_report* report,
                                     const char* path);

/* Trains (or reuses cached checkpoints) and evaluates every grid point. */
TST_API tst_status tst_sweep(const tst_config* cfg, tst_log_fn log, void* user,
                             size_t* trained, size_t* reused);

/* Runs the loss-oracle and gradient self checks; *failures counts failed ones. */
TST_API tst_status tst_losscheck(uint64_t seed, tst_check_fn report, void* user,
                                 size_t* failures);

#ifdef __cplusplus
}
#endif

#endif /* TST_TST_H */
