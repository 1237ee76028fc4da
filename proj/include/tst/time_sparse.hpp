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
#include <string>
#include <string_view>
#include <vector>

#include "tst/random.hpp"
#include "tst/tensor.hpp"

namespace tst {

// How each window's frames are combined into one sparse hidden state.
enum class Strategy {
  AbsoluteAverage,       // "ae": uniform 1/n weights
  LearnedCoefficients,   // "lc": one shared learnable weight per window slot
  SelfAttention,         // "sa": softmax over per-frame scores
};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct WindowConfig {
  std::size_t length = 1;
  std::size_t stride = 1;
  Strategy strategy = Strategy::AbsoluteAverage;

  void validate() const;
};

// Number of windows produced for `frames` input frames. The final window may
// be partial, so every frame is covered.
std::size_t sparse_length(std::size_t frames, std::size_t stride);

struct WindowSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - begin; }
};

std::vector<WindowSpan> window_spans(std::size_t frames,
                                     const WindowConfig& cfg);

// Learnable parameters of the combination step. Only the members used by the
// configured strategy are defined.
struct SparseParams {
  Tensor lc_weights;  // [L]
  Tensor sa_proj;     // [d_h x 1]

  static SparseParams init(const WindowConfig& cfg, std::size_t hidden_dim,
                           Rng& rng);
};

std::vector<Tensor> decompose(const Tensor& hidden, const WindowConfig& cfg);

Tensor combine_ae(const Tensor& window);
// Uses the first n = rows(window) coefficients of `weights`.
Tensor combine_lc(const Tensor& window, const Tensor& weights);
Tensor combine_sa(const Tensor& window, const SparseParams& params);
// Attention coefficients combine_sa would apply to `window`.
Tensor attention_weights(const Tensor& window, const SparseParams& params);

// hidden[T x d_h] -> [T' x d_h].
Tensor sparsify(const Tensor& hidden, const WindowConfig& cfg,
                const SparseParams& params);

}  // namespace tst
