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
#include <string>
#include <vector>

#include "tst/model.hpp"
#include "tst/tensor.hpp"

namespace tst {

struct Utterance {
  std::string id;
  Tensor features;  // [T x d_in]
  LabelSeq labels;
};

using Dataset = std::vector<Utterance>;

struct TaskSpec {
  std::size_t vocab = 6;             // includes blank
  std::size_t input_dim = 8;
  std::size_t frames_per_label = 4;  // R
  double noise = 0.1;                // Gaussian sigma
  std::size_t count = 200;
  std::size_t min_labels = 3;
  std::size_t max_labels = 8;

  void validate() const;
};

// Each label k contributes R frames of the one-hot prototype e_{k-1} plus
// Gaussian noise. Consecutive labels always differ. Pure function of
// (task, seed).
Dataset generate(const TaskSpec& task, std::uint64_t seed);

// Prototype frame for label k (no noise).
std::vector<double> prototype(Label k, std::size_t input_dim);

void validate_utterance(const Utterance& utt);

// One JSON object per line: {"id": ..., "features": [[...], ...], "labels": [...]}.
Dataset load_jsonl(const std::filesystem::path& path);
void save_jsonl(const std::filesystem::path& path, const Dataset& data);

}  // namespace tst
