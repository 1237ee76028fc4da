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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tst/tst.h"

namespace {

struct ConfigDeleter {
  void operator()(tst_config* c) const { tst_config_destroy(c); }
};
struct DatasetDeleter {
  void operator()(tst_dataset* d) const { tst_dataset_destroy(d); }
};
struct ModelDeleter {
  void operator()(tst_model* m) const { tst_model_destroy(m); }
};
using ConfigPtr = std::unique_ptr<tst_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<tst_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<tst_model, ModelDeleter>;

class CliError : public std::runtime_error {
 public:
  CliError(tst_status status, const std::string& context)
      : std::runtime_error(context + ": " + tst_status_string(status) + ": " +
                           tst_last_error()),
        status_(status) {}
  tst_status status() const { return status_; }

 private:
  tst_status status_;
};

void check(tst_status status, const std::string& context) {
  if (status != TST_OK) throw CliError(status, context);
}

std::string config_value(const tst_config* cfg, const char* key) {
  size_t needed = 0;
  tst_config_get(cfg, key, nullptr, 0, &needed);
  std::string buf(needed, '\0');
  check(tst_config_get(cfg, key, buf.data(), buf.size(), &needed), key);
  buf.resize(needed - 1);
  return buf;
}

void log_to_stderr(const char* message, void*) {
  std::fprintf(stderr, "%s\n", message);
}

std::string join_labels(const std::vector<int32_t>& labels) {
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(labels[i]);
  }
  return out;
}

struct Options {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* sub, Options& opts) {
  sub->add_option("--config", opts.config_file, "key=value config file");
  for (size_t i = 0; i < tst_config_key_count(); ++i) {
    const std::string key = tst_config_key_name(i);
    sub->add_option_function<std::string>(
        "--" + key,
        [&opts, key](const std::string& v) { opts.overrides[key] = v; },
        "override config key '" + key + "'");
  }
}

// File, then TST_SEED, then command-line flags.
ConfigPtr build_config(const Options& opts) {
  tst_config* raw = nullptr;
  check(tst_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  if (!opts.config_file.empty()) {
    check(tst_config_load_file(cfg.get(), opts.config_file.c_str()),
          opts.config_file);
  }
  check(tst_config_apply_environment(cfg.get()), "TST_SEED");
  for (const auto& [key, value] : opts.overrides) {
    check(tst_config_set(cfg.get(), key.c_str(), value.c_str()), "--" + key);
  }
  return cfg;
}

DatasetPtr load_dataset(const std::string& path) {
  tst_dataset* raw = nullptr;
  check(tst_dataset_load(path.c_str(), &raw), path);
  return DatasetPtr(raw);
}

ModelPtr load_model(const tst_config* cfg) {
  const auto path = config_value(cfg, "checkpoint");
  tst_model* raw = nullptr;
  check(tst_model_load(cfg, path.c_str(), &raw), path);
  return ModelPtr(raw);
}

int run_gen(const Options& opts) {
  auto cfg = build_config(opts);
  tst_dataset* raw = nullptr;
  check(tst_dataset_generate(cfg.get(), &raw), "gen");
  DatasetPtr data(raw);
  const auto path = config_value(cfg.get(), "dataset");
  check(tst_dataset_save(data.get(), path.c_str()), path);
  std::printf("wrote %zu utterances to %s\n", tst_dataset_size(data.get()),
              path.c_str());
  return 0;
}

int run_train(const Options& opts) {
  auto cfg = build_config(opts);
  auto data = load_dataset(config_value(cfg.get(), "dataset"));
  tst_model* raw = nullptr;
  double initial = 0.0, final_loss = 0.0;
  check(tst_train(cfg.get(), data.get(), log_to_stderr, nullptr, &raw, &initial,
                  &final_loss),
        "train");
  ModelPtr model(raw);
  const auto path = config_value(cfg.get(), "checkpoint");
  check(tst_model_save(model.get(), path.c_str()), path);
  std::printf("mean loss %.6f -> %.6f, checkpoint %s\n", initial, final_loss,
              path.c_str());
  return 0;
}

int run_decode(const Options& opts) {
  auto cfg = build_config(opts);
  auto model = load_model(cfg.get());
  auto data = load_dataset(config_value(cfg.get(), "eval_dataset"));
  for (size_t i = 0; i < tst_dataset_size(data.get()); ++i) {
    size_t len = 0;
    tst_decode(model.get(), cfg.get(), data.get(), i, nullptr, 0, &len);
    std::vector<int32_t> labels(len);
    check(tst_decode(model.get(), cfg.get(), data.get(), i, labels.data(),
                     labels.size(), &len),
          "decode");
    labels.resize(len);
    std::printf("%s\t%s\n", tst_dataset_id(data.get(), i),
                join_labels(labels).c_str());
  }
  return 0;
}

int run_eval(const Options& opts) {
  auto cfg = build_config(opts);
  auto model = load_model(cfg.get());
  auto data = load_dataset(config_value(cfg.get(), "eval_dataset"));
  tst_eval_report report{};
  check(tst_evaluate(model.get(), cfg.get(), data.get(), &report), "eval");
  char row[512];
  size_t needed = 0;
  check(tst_report_csv_row(&report, row, sizeof(row), &needed), "report");
  std::printf("%s\n%s\n", tst_csv_header(), row);
  const auto path = config_value(cfg.get(), "report");
  check(tst_report_append(&report, path.c_str()), path);
  return 0;
}

int run_sweep(const Options& opts) {
  auto cfg = build_config(opts);
  size_t trained = 0, reused = 0;
  check(tst_sweep(cfg.get(), log_to_stderr, nullptr, &trained, &reused), "sweep");
  std::printf("sweep done: %zu trained, %zu from cache, rows appended to %s\n",
              trained, reused, config_value(cfg.get(), "report").c_str());
  return 0;
}

void print_check(const char* name, int passed, const char* detail, void*) {
  std::printf("%s %-26s %s\n", passed ? "PASS" : "FAIL", name, detail);
}

int run_losscheck(const Options& opts) {
  auto cfg = build_config(opts);
  const auto seed = std::stoull(config_value(cfg.get(), "seed"));
  size_t failures = 0;
  check(tst_losscheck(seed, print_check, nullptr, &failures), "losscheck");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-sparse transducer toolkit"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"gen", "synthesize a dataset into <dataset>", run_gen},
      {"train", "train on <dataset> and write <checkpoint>", run_train},
      {"decode", "print decoded labels for <eval_dataset>", run_decode},
      {"eval", "score <checkpoint> on <eval_dataset>, append to <report>", run_eval},
      {"sweep", "train/evaluate a window grid with checkpoint caching", run_sweep},
      {"losscheck", "run loss-oracle and gradient self checks", run_losscheck},
  };
  std::vector<Options> options(std::size(commands));
  std::vector<CLI::App*> subs;
  for (size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].name, commands[i].help);
    add_config_options(sub, options[i]);
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].run(options[i]);
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
