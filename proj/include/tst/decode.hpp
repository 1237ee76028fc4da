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

#include "tst/model.hpp"
#include "tst/tensor.hpp"

namespace tst {

struct DecodeConfig {
  std::size_t beam = 1;
  std::size_t max_emissions = 10;  // per frame

  void validate() const;
};

struct Hypothesis {
  LabelSeq labels;
  double log_score = 0.0;
  PredictionState state;
  Tensor pred_proj;  // g * W_pred, reused for every frame
};

struct DecodeResult {
  LabelSeq labels;
  double log_score = 0.0;
  std::size_t joint_calls = 0;
};

// Frame-synchronous argmax walk. Ties go to the lowest symbol index.
DecodeResult greedy_decode(const Tensor& sparse_hidden, const Transducer& model,
                           std::size_t max_emissions = 10);

// Time-synchronous beam search with prefix merging. With beam 1 this follows
// exactly the greedy walk.
DecodeResult beam_decode(const Tensor& sparse_hidden, const Transducer& model,
                         const DecodeConfig& cfg);

}  // namespace tst
