// Copyright 2026 The normforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NORMFORGE_NORMFORGE_H
#define NORMFORGE_NORMFORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(NF_BUILDING_LIBRARY)
#define NF_API __attribute__((visibility("default")))
#else
#define NF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nf_status {
  NF_OK = 0,
  NF_ERR_INVALID_ARGUMENT = 1,
  NF_ERR_PARSE = 2,
  NF_ERR_IO = 3,
  NF_ERR_VERSION = 4,
  NF_ERR_TRANSPORT = 5,
  NF_ERR_NOT_FOUND = 6,
  NF_ERR_DEGENERATE = 7,
  NF_ERR_STATE = 8,
  NF_ERR_BUFFER_TOO_SMALL = 9,
  NF_ERR_INTERNAL = 10
} nf_status;

/* Message of the last failed call on this thread ("" if none). */
NF_API const char* nf_last_error(void);
NF_API const char* nf_status_name(nf_status status);
NF_API const char* nf_version(void);

/* ---- norm matrices ---- */

typedef struct nf_matrix nf_matrix;

typedef enum nf_view { NF_VIEW_HUMAN_ONLY = 0, NF_VIEW_FULL = 1 } nf_view;
typedef enum nf_provenance {
  NF_ABSENT = 0,
  NF_HUMAN_ELICITED = 1,
  NF_AI_IMPUTED = 2
} nf_provenance;

NF_API nf_status nf_matrix_load(const char* path, nf_matrix** out);
/* Human-only matrix over raw phrases from `participant TAB concept TAB phrase`. */
NF_API nf_status nf_matrix_load_elicitation(const char* path, size_t min_participants,
                                            nf_matrix** out);
NF_API nf_status nf_matrix_save(const nf_matrix* m, const char* path);
NF_API void nf_matrix_free(nf_matrix* m);

NF_API nf_status nf_matrix_shape(const nf_matrix* m, size_t* concepts, size_t* features);
NF_API nf_status nf_matrix_cell(const nf_matrix* m, size_t concept_id, size_t feature_id,
                                nf_provenance* out);
NF_API nf_status nf_matrix_cell_count(const nf_matrix* m, nf_view view, size_t* out);
NF_API nf_status nf_matrix_density(const nf_matrix* m, nf_view view, double* mean,
                                   double* median);
NF_API nf_status nf_matrix_singleton_fraction(const nf_matrix* m, nf_view view, double* out);

/* ---- verification and statistics ---- */

NF_API nf_status nf_parse_response(const char* raw, int* verdict);
/* Writes the NUL-terminated prompt into buf; *needed gets the full size
   including the terminator. NF_ERR_BUFFER_TOO_SMALL if cap < *needed. */
NF_API nf_status nf_build_prompt(int two_shot, const char* concept_label, const char* feature,
                                 char* buf, size_t cap, size_t* needed);
NF_API nf_status nf_probit(double p, double* out);
NF_API nf_status nf_d_prime(int64_t hits, int64_t misses, int64_t false_alarms,
                            int64_t correct_rejections, double* d_prime, double* hit_rate,
                            double* fa_rate);
NF_API nf_status nf_binomial_test(int64_t k, int64_t n, double p0, double* p_value);
NF_API nf_status nf_paired_t_test(const double* x, const double* y, size_t n, double* t,
                                  double* df, double* p_value);

/* ---- pipeline ---- */

typedef struct nf_pipeline nf_pipeline;

typedef struct nf_run_options {
  const char* out_dir;   /* NULL: [paths] out */
  int has_seed;
  uint64_t seed;
  size_t max_parallel;   /* 0: from config */
  int port;              /* serve; < 0: from config */
  const char* data_dir;  /* serve; NULL: from config */
} nf_run_options;

NF_API void nf_run_options_init(nf_run_options* opts);
NF_API nf_status nf_pipeline_open(const char* config_path, const nf_run_options* opts,
                                  nf_pipeline** out);
NF_API void nf_pipeline_free(nf_pipeline* p);

NF_API size_t nf_stage_count(void);
NF_API const char* nf_stage_name(size_t index);

/* Runs one stage, or every stage in order for "all". *report_json (may be
   NULL) points to a JSON summary owned by the handle, valid until the next
   call on it. */
NF_API nf_status nf_pipeline_run(nf_pipeline* p, const char* stage, const char** report_json);
/* Serves the experiment API; blocks. */
NF_API nf_status nf_pipeline_serve(nf_pipeline* p);

#ifdef __cplusplus
}
#endif

#endif
