/* Copyright (c) 2026 The hogformer-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#ifndef HOGFORMER_HOGFORMER_H_
#define HOGFORMER_HOGFORMER_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HOGF_API __declspec(dllexport)
#else
#define HOGF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status; on failure hogf_last_error() holds a
 * one-line message for the calling thread. Strings returned through char**
 * out-parameters are owned by the caller and released with
 * hogf_string_free(). */
typedef enum hogf_status {
  HOGF_OK = 0,
  HOGF_ERR_CONFIG = 1,     /* invalid configuration or hyperparameters */
  HOGF_ERR_INPUT = 2,      /* bad user data (shapes, channels, empty sets) */
  HOGF_ERR_BOUNDS = 3,     /* parameter outside its documented range */
  HOGF_ERR_USAGE = 4,      /* API misuse, null arguments */
  HOGF_ERR_DECODE = 5,     /* unreadable image, manifest or JSON */
  HOGF_ERR_CHECKPOINT = 6, /* corrupt or mismatched checkpoint */
  HOGF_ERR_NUMERIC = 7,    /* non-finite values during training */
  HOGF_ERR_IO = 8,         /* file system failures */
  HOGF_ERR_INTERNAL = 9
} hogf_status;

typedef struct hogf_model hogf_model;

HOGF_API const char* hogf_version(void);
HOGF_API const char* hogf_status_name(hogf_status status);
HOGF_API const char* hogf_last_error(void);
HOGF_API void hogf_string_free(char* s);

/* Log lines are "<ISO-8601 timestamp> <LEVEL> <message>". A null callback
 * restores the default stderr sink. Levels: 0 debug, 1 info, 2 warn, 3 error. */
typedef void (*hogf_log_fn)(const char* line, void* user);
HOGF_API void hogf_set_log_callback(hogf_log_fn fn, void* user);
HOGF_API void hogf_set_log_level(int level);
HOGF_API void hogf_log(int level, const char* message);

/* ---- configuration ---------------------------------------------------- */

/* JSON array of preset names. */
HOGF_API hogf_status hogf_presets(char** json_out);
/* Resolves a model config JSON object (optionally naming a "preset") to the
 * full flat config, validated. */
HOGF_API hogf_status hogf_resolve_config(const char* config_json, char** json_out);
HOGF_API hogf_status hogf_param_count(const char* config_json, int64_t* closed_form, int64_t* constructed);

/* ---- models ----------------------------------------------------------- */

HOGF_API hogf_status hogf_model_create(const char* config_json, uint64_t seed, hogf_model** out);
HOGF_API hogf_status hogf_model_load(const char* path, hogf_model** out);
HOGF_API hogf_status hogf_model_save(const hogf_model* model, const char* path);
HOGF_API void hogf_model_free(hogf_model* model);
HOGF_API hogf_status hogf_model_config(const hogf_model* model, char** json_out);
HOGF_API hogf_status hogf_model_param_count(const hogf_model* model, int64_t* count);

/* chw: 3*height*width floats in [0, 1], planar RGB. out has the same size
 * and receives the clamped restoration. */
HOGF_API hogf_status hogf_restore(const hogf_model* model, const float* chw, int64_t height, int64_t width,
                                  float* out);
HOGF_API hogf_status hogf_restore_file(const hogf_model* model, const char* in_path, const char* out_path);

/* ---- training and evaluation ------------------------------------------ */

typedef struct hogf_step {
  int64_t step;
  double l_rec;
  double l_cor;
  double l_hog;
  double total;
  double lr;
} hogf_step;

typedef void (*hogf_step_fn)(const hogf_step* step, void* user);

/* train_json: {"model": {...}, "manifest", "crop", "batch", "steps", "lr",
 * "lr_min", "seed", "flips", "alpha", "beta", "eval_every", "eval_images",
 * "log_csv", "checkpoint_out", "checkpoint_every", "resume"}. The summary
 * JSON holds the final step and the last loss record. */
HOGF_API hogf_status hogf_train(const char* train_json, hogf_step_fn on_step, void* user, char** summary_json);

/* Metric report JSON: per-image psnr/ssim (restored and degraded input)
 * plus means. */
HOGF_API hogf_status hogf_eval(const hogf_model* model, const char* manifest_path, char** report_json);

/* ---- diagnostics ------------------------------------------------------ */

/* module: all | hog | blocks | model | loss. all_passed is set to 1 when
 * every target is below the tolerance. */
HOGF_API hogf_status hogf_grad_check(const char* module, uint64_t seed, char** report_json, int* all_passed);

/* Groups manifest samples by degradation kind and writes signatures.csv,
 * distances.csv and profile.json into out_dir. */
HOGF_API hogf_status hogf_hog_profile(const char* manifest_path, const char* out_dir, char** report_json);

/* ---- data ------------------------------------------------------------- */

/* spec_json: a degradation spec object ({"kind": ..., parameters}). The
 * seed overrides the spec's own seed. */
HOGF_API hogf_status hogf_degrade_file(const char* in_path, const char* spec_json, uint64_t seed,
                                       const char* out_path);
HOGF_API hogf_status hogf_build_manifest(const char* root, const char* out_path, char** manifest_json);
/* options_json: {"images", "height", "width", "seed", "specs": [...]}. */
HOGF_API hogf_status hogf_make_corpus(const char* dir, const char* options_json, char** manifest_json);

#ifdef __cplusplus
}
#endif

#endif /* HOGFORMER_HOGFORMER_H_ */
