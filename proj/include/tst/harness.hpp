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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tst/decode.hpp"
#include "tst/metrics.hpp"
#include "tst/model.hpp"
#include "tst/synth_data.hpp"
#include "tst/time_sparse.hpp"

namespace tst {

enum class DecoderKind { Greedy, Beam };

std::string_view to_string(DecoderKind kind);
DecoderKind parse_decoder(std::string_view text);

struct OptimizerConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t steps = 2000;
  std::size_t batch_size = 8;
  double clip_norm = 5.0;  // global gradient-norm clip, 0 disables
  std::size_t log_every = 100;
};

struct RunConfig {
  ModelDims dims;
  WindowConfig window;
  DecoderKind decoder = DecoderKind::Greedy;
  DecodeConfig decode;
  OptimizerConfig optimizer;
  TaskSpec task;  // used by `gen`
  std::uint64_t seed = 1;
  std::string dataset = "train.jsonl";
  std::string eval_dataset = "eval.jsonl";
  std::string checkpoint = "model.ckpt";
  std::string report = "report.csv";
  std::string cache_dir = ".tst_cache";
  std::string sweep_lengths;     // comma-separated; empty keeps window_length
  std::string sweep_strides;     // comma-separated; empty keeps window_stride
  std::string sweep_strategies;  // comma-separated; empty keeps strategy

  // Flat key=value access. Throws ConfigError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static const std::vector<std::string>& keys();
  // Reads `key = value` lines; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  // Applies TST_SEED from the environment when present.
  void apply_environment();
  void validate() const;

  // Hash of everything that influences training (dims, window, optimizer,
  // seed, dataset contents). Used as the sweep cache key.
  std::string training_fingerprint() const;
  // Hash of the full run description including decoding settings.
  std::string config_id() const;
};

using LogFn = std::function<void(const std::string&)>;

struct TrainResult {
  Transducer model;
  std::vector<double> step_losses;  // mean loss of each mini-batch
  double initial_mean_loss = 0.0;   // over the training set, before step 1
  double final_mean_loss = 0.0;     // over the training set, after training
};

double mean_loss(const Transducer& model, const Dataset& data);

TrainResult train(const RunConfig& cfg, const Dataset& data,
                  const LogFn& log = {});

struct EvalOutput {
  EvalReport report;
  std::vector<LabelSeq> hypotheses;
};

DecodeResult decode_utterance(const Transducer& model, const RunConfig& cfg,
                              const Tensor& features);

EvalOutput evaluate(const RunConfig& cfg, const Transducer& model,
                    const Dataset& data);

// Appends one row, writing the header first if the file is new or empty.
void append_csv(const std::filesystem::path& path, const EvalReport& report);

struct SweepResult {
  std::vector<EvalReport> reports;
  std::size_t trained = 0;  // grid points that needed training
  std::size_t reused = 0;   // grid points served from the cache
};

SweepResult sweep(const RunConfig& cfg, const Dataset& train_data,
                  const Dataset& eval_data, const LogFn& log = {});

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Finite-difference check of every parameter gradient of utterance_loss.
// Returns the worst per-tensor relative error ||a - n|| / max(||a||, ||n||).
double gradient_check(const Transducer& model, const Utterance& utt,
                      double epsilon = 1e-6);

// Oracle and gradient self-checks behind the `losscheck` subcommand.
std::vector<CheckResult> run_self_checks(std::uint64_t seed);

}  // namespace tst
