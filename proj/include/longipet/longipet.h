/* Copyright 2026 The LongiPET Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to the longipet toolkit. All handles are opaque; every call
 * that can fail returns an lp_status and leaves a message retrievable with
 * lp_last_error() on the calling thread. */

#ifndef LONGIPET_LONGIPET_H_
#define LONGIPET_LONGIPET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(LONGIPET_BUILDING_LIBRARY)
#define LP_API __attribute__((visibility("default")))
#else
#define LP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes of the command-line tool. */
typedef enum lp_status {
  LP_OK = 0,
  LP_ERR_USAGE = 2,
  LP_ERR_IO = 3,
  LP_ERR_FORMAT = 4,
  LP_ERR_UNSUPPORTED = 5,
  LP_ERR_CORRUPT = 6,
  LP_ERR_MANIFEST = 7,
  LP_ERR_SHAPE = 8,
  LP_ERR_PARAMETER = 9,
  LP_ERR_NORMALIZATION = 10,
  LP_ERR_STATE = 11,
  LP_ERR_INPUT = 12,
  LP_ERR_DIVERGENCE = 13,
  LP_ERR_PLAN = 14,
  LP_ERR_LEAKAGE = 15,
  LP_ERR_DEGENERATE = 16,
  LP_ERR_CONTRACT = 17,
  LP_ERR_INTERNAL = 70
} lp_status;

typedef struct lp_volume lp_volume;
typedef struct lp_model lp_model;

LP_API const char* lp_version(void);
LP_API const char* lp_status_name(lp_status status);
/* Message of the last failed call on this thread ("" if none). */
LP_API const char* lp_last_error(void);

/* Volumes: x-fastest float64 data. */
LP_API lp_status lp_volume_create(int nx, int ny, int nz, const double* data, lp_volume** out);
LP_API lp_status lp_volume_read(const char* path, lp_volume** out);
LP_API lp_status lp_volume_write(const lp_volume* vol, const char* path);
LP_API lp_status lp_volume_dims(const lp_volume* vol, int* nx, int* ny, int* nz);
LP_API lp_status lp_volume_copy_data(const lp_volume* vol, double* out, size_t count);
LP_API lp_status lp_volume_pad_to_even(const lp_volume* vol, lp_volume** out);
LP_API void lp_volume_free(lp_volume* vol);

/* 2 * prev1 - prev2, optionally clamped at zero. */
LP_API lp_status lp_predict_linear(const lp_volume* prev2, const lp_volume* prev1, int clamp, lp_volume** out);

/* Image-to-image model. */
LP_API lp_status lp_model_init(int nx, int ny, int nz, int lstm_filters, int decoder_filters, uint64_t seed,
                               lp_model** out);
LP_API lp_status lp_model_load(const char* path, lp_model** out);
LP_API lp_status lp_model_save(const lp_model* model, const char* path);
LP_API lp_status lp_model_dims(const lp_model* model, int* nx, int* ny, int* nz);
LP_API lp_status lp_model_predict(const lp_model* model, const lp_volume* baseline, const lp_volume* year1,
                                  lp_volume** out);
/* Shapes after the LSTM, pooling and the final layer, each as (X, Y, Z, C). */
LP_API lp_status lp_model_trace(const lp_model* model, const lp_volume* baseline, const lp_volume* year1,
                                int lstm_xyzc[4], int pooled_xyzc[4], int output_xyzc[4]);
LP_API void lp_model_free(lp_model* model);

/* Metrics. mask may be NULL. */
LP_API lp_status lp_mae(const lp_volume* a, const lp_volume* b, const lp_volume* mask, double* out);
LP_API lp_status lp_ssim3d(const lp_volume* a, const lp_volume* b, double* out);

/* SHA-256 of a file as 64 lowercase hex digits plus NUL. */
LP_API lp_status lp_hash_file(const char* path, char out_hex[65]);

/* Runs one pipeline command ("phantom", "preprocess", "augment", "train",
 * "predict", "forecast", "evaluate", "stats", "report") with options given
 * as a JSON object. On success *run_manifest (if non-NULL) receives the run
 * manifest as JSON, to be released with lp_string_free. */
LP_API lp_status lp_run(const char* command, const char* options_json, char** run_manifest);
LP_API void lp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* LONGIPET_LONGIPET_H_ */
