// Copyright 2026 The gkpfloquet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gkpfloquet/gkpfloquet.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "gkpfloquet/harness.hpp"

struct gkp_config {
  gkp::ConfigDocument doc;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> workers;
};

struct gkp_result {
  gkp::RunReport report;
};

namespace {

thread_local std::string last_error;

gkp_status set_error(gkp_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs f, translating exceptions into status codes.
template <class F>
gkp_status guard(F&& f) {
  last_error.clear();
  try {
    f();
    return GKP_OK;
  } catch (const gkp::Error& e) {
    return set_error(static_cast<gkp_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GKP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GKP_ERR_INTERNAL, e.what());
  }
}

gkp::ExperimentConfig resolve(const gkp_config* c) {
  gkp::ExperimentConfig cfg = c->doc.resolve();
  if (c->seed) cfg.noise.master_seed = *c->seed;
  if (c->output_dir) cfg.output_dir = *c->output_dir;
  if (c->workers) cfg.workers = *c->workers;
  return cfg;
}

// The seed is a config field, so sweeps see it through the document.
gkp::ConfigDocument effective_doc(const gkp_config* c) {
  gkp::ConfigDocument doc = c->doc;
  if (c->seed) doc.set("seed", std::to_string(*c->seed));
  return doc;
}

gkp_status copy_out(const std::string& s, char* buf, size_t size, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && size > 0) {
    const size_t n = std::min(size - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return GKP_OK;
}

#define GKP_REQUIRE(cond, what) \
  if (!(cond)) return set_error(GKP_ERR_INVALID_ARGUMENT, what)

const gkp::PointStatus* point(const gkp_result* r, size_t i) {
  if (!r || i >= r->report.points.size()) return nullptr;
  return &r->report.points[i];
}

}  // namespace

extern "C" {

const char* gkp_version(void) { return gkp::kVersion; }

const char* gkp_last_error(void) { return last_error.c_str(); }

gkp_status gkp_config_load(const char* path, gkp_config** out) {
  GKP_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guard([&] { *out = new gkp_config{gkp::ConfigDocument::load(path), {}, {}, {}}; });
}

gkp_status gkp_config_parse(const char* text, gkp_config** out) {
  GKP_REQUIRE(text && out, "null argument");
  *out = nullptr;
  return guard([&] { *out = new gkp_config{gkp::ConfigDocument::parse(text), {}, {}, {}}; });
}

void gkp_config_free(gkp_config* config) { delete config; }

gkp_status gkp_config_override(gkp_config* config, const char* assignment) {
  GKP_REQUIRE(config && assignment, "null argument");
  return guard([&] { config->doc.set_override(assignment); });
}

gkp_status gkp_config_set_seed(gkp_config* config, uint64_t seed) {
  GKP_REQUIRE(config, "null config");
  config->seed = seed;
  return GKP_OK;
}

gkp_status gkp_config_set_output_dir(gkp_config* config, const char* dir) {
  GKP_REQUIRE(config && dir && *dir, "output directory must be a non-empty path");
  config->output_dir = dir;
  return GKP_OK;
}

gkp_status gkp_config_set_workers(gkp_config* config, int workers) {
  GKP_REQUIRE(config, "null config");
  GKP_REQUIRE(workers >= 1, "workers must be >= 1");
  config->workers = workers;
  return GKP_OK;
}

gkp_status gkp_config_validate(const gkp_config* config) {
  GKP_REQUIRE(config, "null config");
  return guard([&] { resolve(config); });
}

gkp_status gkp_config_hash(const gkp_config* config, char* buf, size_t size, size_t* needed) {
  GKP_REQUIRE(config, "null config");
  std::string hash;
  const gkp_status s = guard([&] { hash = gkp::config_hash(resolve(config)); });
  return s == GKP_OK ? copy_out(hash, buf, size, needed) : s;
}

gkp_status gkp_config_to_json(const gkp_config* config, char* buf, size_t size, size_t* needed) {
  GKP_REQUIRE(config, "null config");
  std::string json;
  const gkp_status s = guard([&] { json = gkp::canonical_json(resolve(config)); });
  return s == GKP_OK ? copy_out(json, buf, size, needed) : s;
}

gkp_status gkp_run(const gkp_config* config, gkp_result** out) {
  GKP_REQUIRE(config && out, "null argument");
  *out = nullptr;
  return guard([&] { *out = new gkp_result{gkp::run_experiment(resolve(config))}; });
}

gkp_status gkp_sweep(const gkp_config* config, const char* axis, const double* values, size_t count,
                     gkp_result** out) {
  GKP_REQUIRE(config && axis && out, "null argument");
  GKP_REQUIRE(values || count == 0, "null values");
  *out = nullptr;
  return guard([&] {
    const gkp::ExperimentConfig base = resolve(config);
    *out = new gkp_result{gkp::run_sweep(effective_doc(config), axis, std::vector<double>(values, values + count),
                                         base.output_dir, base.workers)};
  });
}

gkp_status gkp_run_oracles(const char* output_dir, int workers, gkp_result** out) {
  GKP_REQUIRE(output_dir && out, "null argument");
  GKP_REQUIRE(workers >= 1, "workers must be >= 1");
  *out = nullptr;
  return guard([&] { *out = new gkp_result{gkp::run_oracles(output_dir, workers)}; });
}

int gkp_result_exit_code(const gkp_result* result) { return result ? result->report.exit_code : 3; }

const char* gkp_result_summary(const gkp_result* result) { return result ? result->report.summary.c_str() : ""; }

const char* gkp_result_config_hash(const gkp_result* result) {
  return result ? result->report.config_hash.c_str() : "";
}

const char* gkp_result_output_dir(const gkp_result* result) {
  return result ? result->report.output_dir.c_str() : "";
}

size_t gkp_result_point_count(const gkp_result* result) { return result ? result->report.points.size() : 0; }

const char* gkp_result_point_label(const gkp_result* result, size_t i) {
  const gkp::PointStatus* p = point(result, i);
  return p ? p->label.c_str() : nullptr;
}

const char* gkp_result_point_status(const gkp_result* result, size_t i) {
  const gkp::PointStatus* p = point(result, i);
  return p ? p->status.c_str() : nullptr;
}

const char* gkp_result_point_error(const gkp_result* result, size_t i) {
  const gkp::PointStatus* p = point(result, i);
  return p ? p->error.c_str() : nullptr;
}

void gkp_result_free(gkp_result* result) { delete result; }

int gkp_exit_code(gkp_status status) {
  if (status == GKP_OK) return 0;
  if (status == GKP_ERR_CONFIG || status == GKP_ERR_INVALID_ARGUMENT) return 2;
  return 3;
}

}  // extern "C"
