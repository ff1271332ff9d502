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

#include "normforge/normforge.h"

#include <cstring>
#include <string>

#include "common/error.hpp"
#include "common/version.hpp"
#include "judgment/judgment.hpp"
#include "norms/norm_matrix.hpp"
#include "pipeline/pipeline.hpp"
#include "sdt/sdt.hpp"
#include "verifier/prompt.hpp"

using namespace normforge;

struct nf_matrix {
  norms::NormMatrix m;
};

struct nf_pipeline {
  pipeline::Pipeline p;
  std::string report;
};

namespace {

thread_local std::string g_last_error;

nf_status map_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return NF_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return NF_ERR_PARSE;
    case ErrorCode::Io: return NF_ERR_IO;
    case ErrorCode::Version: return NF_ERR_VERSION;
    case ErrorCode::Transport: return NF_ERR_TRANSPORT;
    case ErrorCode::NotFound: return NF_ERR_NOT_FOUND;
    case ErrorCode::Degenerate: return NF_ERR_DEGENERATE;
    case ErrorCode::State: return NF_ERR_STATE;
  }
  return NF_ERR_INTERNAL;
}

template <class F>
nf_status guard(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

norms::View view_of(nf_view v) {
  if (v == NF_VIEW_HUMAN_ONLY) return norms::View::HumanOnly;
  if (v == NF_VIEW_FULL) return norms::View::Full;
  fail(ErrorCode::InvalidArgument, "unknown view");
}

}  // namespace

extern "C" {

const char* nf_last_error(void) { return g_last_error.c_str(); }

const char* nf_status_name(nf_status s) {
  switch (s) {
    case NF_OK: return "ok";
    case NF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case NF_ERR_PARSE: return "parse";
    case NF_ERR_IO: return "io";
    case NF_ERR_VERSION: return "version";
    case NF_ERR_TRANSPORT: return "transport";
    case NF_ERR_NOT_FOUND: return "not_found";
    case NF_ERR_DEGENERATE: return "degenerate";
    case NF_ERR_STATE: return "state";
    case NF_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case NF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* nf_version(void) { return kVersion; }

nf_status nf_matrix_load(const char* path, nf_matrix** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new nf_matrix{norms::load_matrix(path)};
    return NF_OK;
  });
}

nf_status nf_matrix_load_elicitation(const char* path, size_t min_participants, nf_matrix** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    if (min_participants == 0) fail(ErrorCode::InvalidArgument, "min_participants must be >= 1");
    auto data = norms::read_elicitation(path);
    *out = new nf_matrix{norms::build_elicitation_matrix(data, min_participants)};
    return NF_OK;
  });
}

nf_status nf_matrix_save(const nf_matrix* m, const char* path) {
  return guard([&] {
    need(m, "matrix");
    need(path, "path");
    norms::save_matrix(m->m, path);
    return NF_OK;
  });
}

void nf_matrix_free(nf_matrix* m) { delete m; }

nf_status nf_matrix_shape(const nf_matrix* m, size_t* concepts, size_t* features) {
  return guard([&] {
    need(m, "matrix");
    if (concepts) *concepts = m->m.concept_count();
    if (features) *features = m->m.feature_count();
    return NF_OK;
  });
}

nf_status nf_matrix_cell(const nf_matrix* m, size_t concept_id, size_t feature_id,
                         nf_provenance* out) {
  return guard([&] {
    need(m, "matrix");
    need(out, "out");
    if (concept_id >= m->m.concept_count() || feature_id >= m->m.feature_count()) {
      fail(ErrorCode::InvalidArgument, "cell index out of range");
    }
    *out = static_cast<nf_provenance>(
        m->m.get(static_cast<int>(concept_id), static_cast<int>(feature_id)));
    return NF_OK;
  });
}

nf_status nf_matrix_cell_count(const nf_matrix* m, nf_view view, size_t* out) {
  return guard([&] {
    need(m, "matrix");
    need(out, "out");
    *out = m->m.cell_count(view_of(view));
    return NF_OK;
  });
}

nf_status nf_matrix_density(const nf_matrix* m, nf_view view, double* mean, double* median) {
  return guard([&] {
    need(m, "matrix");
    auto d = norms::feature_density_stats(m->m, view_of(view));
    if (mean) *mean = d.mean;
    if (median) *median = d.median;
    return NF_OK;
  });
}

nf_status nf_matrix_singleton_fraction(const nf_matrix* m, nf_view view, double* out) {
  return guard([&] {
    need(m, "matrix");
    need(out, "out");
    *out = norms::feature_overlap_stats(m->m, view_of(view)).singleton_fraction;
    return NF_OK;
  });
}

nf_status nf_parse_response(const char* raw, int* verdict) {
  return guard([&] {
    need(raw, "raw");
    need(verdict, "verdict");
    *verdict = verifier::parse_response(raw) ? 1 : 0;
    return NF_OK;
  });
}

nf_status nf_build_prompt(int two_shot, const char* concept_label, const char* feature, char* buf,
                          size_t cap, size_t* needed) {
  return guard([&] {
    need(concept_label, "concept");
    need(feature, "feature");
    verifier::PromptTemplate t;
    t.mode = two_shot ? verifier::PromptMode::TwoShot : verifier::PromptMode::ZeroShot;
    std::string s = verifier::build_prompt(t, concept_label, feature);
    if (needed) *needed = s.size() + 1;
    if (!buf || cap < s.size() + 1) {
      g_last_error = "buffer too small";
      return NF_ERR_BUFFER_TOO_SMALL;
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return NF_OK;
  });
}

nf_status nf_probit(double p, double* out) {
  return guard([&] {
    need(out, "out");
    *out = sdt::probit(p);
    return NF_OK;
  });
}

nf_status nf_d_prime(int64_t hits, int64_t misses, int64_t false_alarms,
                     int64_t correct_rejections, double* d_prime, double* hit_rate,
                     double* fa_rate) {
  return guard([&] {
    need(d_prime, "d_prime");
    auto r = sdt::d_prime({hits, misses, false_alarms, correct_rejections});
    *d_prime = r.d_prime;
    if (hit_rate) *hit_rate = r.hit_rate;
    if (fa_rate) *fa_rate = r.fa_rate;
    return NF_OK;
  });
}

nf_status nf_binomial_test(int64_t k, int64_t n, double p0, double* p_value) {
  return guard([&] {
    need(p_value, "p_value");
    *p_value = judgment::binomial_test(k, n, p0);
    return NF_OK;
  });
}

nf_status nf_paired_t_test(const double* x, const double* y, size_t n, double* t, double* df,
                           double* p_value) {
  return guard([&] {
    need(x, "x");
    need(y, "y");
    auto r = judgment::paired_t_test(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
    if (t) *t = r.t;
    if (df) *df = r.df;
    if (p_value) *p_value = r.p_value;
    return NF_OK;
  });
}

void nf_run_options_init(nf_run_options* opts) {
  if (!opts) return;
  *opts = nf_run_options{};
  opts->port = -1;
}

nf_status nf_pipeline_open(const char* config_path, const nf_run_options* opts,
                           nf_pipeline** out) {
  return guard([&] {
    need(config_path, "config path");
    need(out, "out");
    *out = nullptr;
    pipeline::RunOptions ro;
    if (opts) {
      if (opts->out_dir) ro.out_dir = opts->out_dir;
      if (opts->has_seed) ro.seed = opts->seed;
      if (opts->max_parallel) ro.max_parallel = opts->max_parallel;
      if (opts->port >= 0) ro.port = opts->port;
      if (opts->data_dir) ro.data_dir = opts->data_dir;
    }
    *out = new nf_pipeline{pipeline::Pipeline(config_path, ro), {}};
    return NF_OK;
  });
}

void nf_pipeline_free(nf_pipeline* p) { delete p; }

size_t nf_stage_count(void) { return pipeline::Pipeline::stage_names().size(); }

const char* nf_stage_name(size_t index) {
  const auto& names = pipeline::Pipeline::stage_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

nf_status nf_pipeline_run(nf_pipeline* p, const char* stage, const char** report_json) {
  return guard([&] {
    need(p, "pipeline");
    need(stage, "stage");
    auto to_json = [](const pipeline::StageReport& r) {
      return nlohmann::json{{"stage", r.stage}, {"skipped", r.skipped}, {"details", r.details}};
    };
    nlohmann::json j;
    if (std::string(stage) == "all") {
      j = nlohmann::json::array();
      for (const auto& r : p->p.run_all()) j.push_back(to_json(r));
    } else {
      j = to_json(p->p.run(stage));
    }
    p->report = j.dump();
    if (report_json) *report_json = p->report.c_str();
    return NF_OK;
  });
}

nf_status nf_pipeline_serve(nf_pipeline* p) {
  return guard([&] {
    need(p, "pipeline");
    p->p.serve();
    return NF_OK;
  });
}

}  // extern "C"
