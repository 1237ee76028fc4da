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

#include "tst/tst.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "tst/error.hpp"
#include "tst/harness.hpp"

struct tst_config {
  tst::RunConfig cfg;
};

struct tst_dataset {
  tst::Dataset data;
};

struct tst_model {
  tst::Transducer model;
};

namespace {

thread_local std::string g_last_error;

tst_status status_for(tst::ErrorKind kind) {
  switch (kind) {
    case tst::ErrorKind::Dimension: return TST_ERR_DIMENSION;
    case tst::ErrorKind::Domain: return TST_ERR_DOMAIN;
    case tst::ErrorKind::Contract: return TST_ERR_CONTRACT;
    case tst::ErrorKind::EmptyInput: return TST_ERR_EMPTY_INPUT;
    case tst::ErrorKind::Parse: return TST_ERR_PARSE;
    case tst::ErrorKind::Schema: return TST_ERR_SCHEMA;
    case tst::ErrorKind::Io: return TST_ERR_IO;
    case tst::ErrorKind::Checkpoint: return TST_ERR_CHECKPOINT;
    case tst::ErrorKind::Diverged: return TST_ERR_DIVERGED;
    case tst::ErrorKind::Config: return TST_ERR_CONFIG;
  }
  return TST_ERR_INTERNAL;
}

tst_status fail(tst_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename Body>
tst_status guarded(Body&& body) {
  try {
    g_last_error.clear();
    body();
    return TST_OK;
  } catch (const tst::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TST_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(TST_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(TST_ERR_INTERNAL, e.what());
  }
}

tst_status copy_out(const std::string& text, char* buf, size_t cap,
                    size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf || cap < text.size() + 1) {
    return fail(TST_ERR_BUFFER_TOO_SMALL, "buffer too small");
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return TST_OK;
}

tst_status copy_labels(const tst::LabelSeq& labels, int32_t* out, size_t cap,
                       size_t* len) {
  if (len) *len = labels.size();
  if (labels.size() > cap || (!out && !labels.empty())) {
    return fail(TST_ERR_BUFFER_TOO_SMALL, "label buffer too small");
  }
  for (size_t i = 0; i < labels.size(); ++i) out[i] = labels[i];
  return TST_OK;
}

void copy_field(char* dst, size_t cap, const std::string& src) {
  std::strncpy(dst, src.c_str(), cap - 1);
  dst[cap - 1] = '\0';
}

tst_eval_report to_c(const tst::EvalReport& r) {
  tst_eval_report out{};
  copy_field(out.config_id, sizeof(out.config_id), r.config_id);
  out.window_length = r.window_length;
  out.window_stride = r.window_stride;
  copy_field(out.strategy, sizeof(out.strategy), r.strategy);
  copy_field(out.decoder, sizeof(out.decoder), r.decoder);
  out.beam = r.beam;
  out.cer_percent = r.cer_percent;
  out.rtf = r.rtf;
  out.lattice_cells = r.lattice_cells;
  out.joint_calls = r.joint_calls;
  out.wall_ms = r.wall_ms;
  return out;
}

tst::EvalReport from_c(const tst_eval_report& r) {
  tst::EvalReport out;
  out.config_id = r.config_id;
  out.window_length = r.window_length;
  out.window_stride = r.window_stride;
  out.strategy = r.strategy;
  out.decoder = r.decoder;
  out.beam = r.beam;
  out.cer_percent = r.cer_percent;
  out.rtf = r.rtf;
  out.lattice_cells = r.lattice_cells;
  out.joint_calls = r.joint_calls;
  out.wall_ms = r.wall_ms;
  return out;
}

tst::LogFn wrap_log(tst_log_fn log, void* user) {
  if (!log) return {};
  return [log, user](const std::string& msg) { log(msg.c_str(), user); };
}

#define TST_REQUIRE(cond)                                              \
  do {                                                                 \
    if (!(cond)) return fail(TST_ERR_INVALID_ARGUMENT, #cond " is false"); \
  } while (0)

}  // namespace

extern "C" {

const char* tst_version(void) { return "1.0.0"; }

const char* tst_status_string(tst_status status) {
  switch (status) {
    case TST_OK: return "ok";
    case TST_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TST_ERR_DIMENSION: return "dimension error";
    case TST_ERR_DOMAIN: return "numeric domain error";
    case TST_ERR_CONTRACT: return "contract violation";
    case TST_ERR_EMPTY_INPUT: return "empty input";
    case TST_ERR_PARSE: return "parse error";
    case TST_ERR_SCHEMA: return "schema error";
    case TST_ERR_IO: return "i/o error";
    case TST_ERR_CHECKPOINT: return "checkpoint incompatible";
    case TST_ERR_DIVERGED: return "training diverged";
    case TST_ERR_CONFIG: return "configuration error";
    case TST_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case TST_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* tst_last_error(void) { return g_last_error.c_str(); }

tst_status tst_config_create(tst_config** out) {
  TST_REQUIRE(out);
  return guarded([&] { *out = new tst_config{}; });
}

void tst_config_destroy(tst_config* cfg) { delete cfg; }

tst_status tst_config_load_file(tst_config* cfg, const char* path) {
  TST_REQUIRE(cfg && path);
  return guarded([&] { cfg->cfg.load_file(path); });
}

tst_status tst_config_set(tst_config* cfg, const char* key, const char* value) {
  TST_REQUIRE(cfg && key && value);
  return guarded([&] { cfg->cfg.set(key, value); });
}

tst_status tst_config_get(const tst_config* cfg, const char* key, char* buf,
                          size_t cap, size_t* needed) {
  TST_REQUIRE(cfg && key);
  std::string value;
  const auto st = guarded([&] { value = cfg->cfg.get(key); });
  if (st != TST_OK) return st;
  return copy_out(value, buf, cap, needed);
}

tst_status tst_config_apply_environment(tst_config* cfg) {
  TST_REQUIRE(cfg);
  return guarded([&] { cfg->cfg.apply_environment(); });
}

size_t tst_config_key_count(void) { return tst::RunConfig::keys().size(); }

const char* tst_config_key_name(size_t index) {
  const auto& keys = tst::RunConfig::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

tst_status tst_dataset_generate(const tst_config* cfg, tst_dataset** out) {
  TST_REQUIRE(cfg && out);
  return guarded([&] {
    auto task = cfg->cfg.task;
    task.vocab = cfg->cfg.dims.vocab;
    task.input_dim = cfg->cfg.dims.input;
    *out = new tst_dataset{tst::generate(task, cfg->cfg.seed)};
  });
}

tst_status tst_dataset_load(const char* path, tst_dataset** out) {
  TST_REQUIRE(path && out);
  return guarded([&] { *out = new tst_dataset{tst::load_jsonl(path)}; });
}

tst_status tst_dataset_save(const tst_dataset* data, const char* path) {
  TST_REQUIRE(data && path);
  return guarded([&] { tst::save_jsonl(path, data->data); });
}

size_t tst_dataset_size(const tst_dataset* data) {
  return data ? data->data.size() : 0;
}

const char* tst_dataset_id(const tst_dataset* data, size_t index) {
  if (!data || index >= data->data.size()) return nullptr;
  return data->data[index].id.c_str();
}

tst_status tst_dataset_labels(const tst_dataset* data, size_t index,
                              int32_t* labels, size_t cap, size_t* len) {
  TST_REQUIRE(data && index < data->data.size());
  return copy_labels(data->data[index].labels, labels, cap, len);
}

void tst_dataset_destroy(tst_dataset* data) { delete data; }

tst_status tst_train(const tst_config* cfg, const tst_dataset* data,
                     tst_log_fn log, void* user, tst_model** out,
                     double* initial_loss, double* final_loss) {
  TST_REQUIRE(cfg && data && out);
  return guarded([&] {
    auto result = tst::train(cfg->cfg, data->data, wrap_log(log, user));
    if (initial_loss) *initial_loss = result.initial_mean_loss;
    if (final_loss) *final_loss = result.final_mean_loss;
    *out = new tst_model{std::move(result.model)};
  });
}

tst_status tst_model_save(const tst_model* model, const char* path) {
  TST_REQUIRE(model && path);
  return guarded([&] { tst::save_checkpoint(model->model, path); });
}

tst_status tst_model_load(const tst_config* cfg, const char* path,
                          tst_model** out) {
  TST_REQUIRE(cfg && path && out);
  return guarded([&] {
    *out = new tst_model{
        tst::load_checkpoint(path, cfg->cfg.dims, cfg->cfg.window)};
  });
}

void tst_model_destroy(tst_model* model) { delete model; }

tst_status tst_decode(const tst_model* model, const tst_config* cfg,
                      const tst_dataset* data, size_t index, int32_t* labels,
                      size_t cap, size_t* len) {
  TST_REQUIRE(model && cfg && data && index < data->data.size());
  tst::LabelSeq decoded;
  const auto st = guarded([&] {
    decoded = tst::decode_utterance(model->model, cfg->cfg,
                                    data->data[index].features)
                  .labels;
  });
  if (st != TST_OK) return st;
  return copy_labels(decoded, labels, cap, len);
}

tst_status tst_evaluate(const tst_model* model, const tst_config* cfg,
                        const tst_dataset* data, tst_eval_report* out) {
  TST_REQUIRE(model && cfg && data && out);
  return guarded([&] {
    *out = to_c(tst::evaluate(cfg->cfg, model->model, data->data).report);
  });
}

const char* tst_csv_header(void) { return tst::kCsvHeader; }

tst_status tst_report_csv_row(const tst_eval_report* report, char* buf,
                              size_t cap, size_t* needed) {
  TST_REQUIRE(report);
  return copy_out(tst::to_csv_row(from_c(*report)), buf, cap, needed);
}

tst_status tst_report_append(const tst_eval_report* report, const char* path) {
  TST_REQUIRE(report && path);
  return guarded([&] { tst::append_csv(path, from_c(*report)); });
}

tst_status tst_sweep(const tst_config* cfg, tst_log_fn log, void* user,
                     size_t* trained, size_t* reused) {
  TST_REQUIRE(cfg);
  return guarded([&] {
    const auto train_data = tst::load_jsonl(cfg->cfg.dataset);
    const auto eval_data = tst::load_jsonl(cfg->cfg.eval_dataset);
    const auto result = tst::sweep(cfg->cfg, train_data, eval_data,
                                   wrap_log(log, user));
    if (trained) *trained = result.trained;
    if (reused) *reused = result.reused;
  });
}

tst_status tst_losscheck(uint64_t seed, tst_check_fn report, void* user,
                         size_t* failures) {
  return guarded([&] {
    size_t failed = 0;
    for (const auto& check : tst::run_self_checks(seed)) {
      if (!check.passed) ++failed;
      if (report) report(check.name.c_str(), check.passed, check.detail.c_str(), user);
    }
    if (failures) *failures = failed;
  });
}

}  // extern "C"
