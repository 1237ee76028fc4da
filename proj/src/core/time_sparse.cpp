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

#include "tst/time_sparse.hpp"

#include <cmath>

#include "tst/error.hpp"
#include "tst/ops.hpp"

namespace tst {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::AbsoluteAverage: return "ae";
    case Strategy::LearnedCoefficients: return "lc";
    case Strategy::SelfAttention: return "sa";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "ae") return Strategy::AbsoluteAverage;
  if (text == "lc") return Strategy::LearnedCoefficients;
  if (text == "sa") return Strategy::SelfAttention;
  throw ConfigError("unknown strategy '" + std::string(text) +
                    "' (expected ae, lc or sa)");
}

void WindowConfig::validate() const {
  if (length < 1) throw ConfigError("window length must be >= 1");
  if (stride < 1) throw ConfigError("window stride must be >= 1");
}

std::size_t sparse_length(std::size_t frames, std::size_t stride) {
  if (frames == 0) throw EmptyInputError("sparse_length: zero frames");
  if (stride == 0) throw ConfigError("window stride must be >= 1");
  return (frames - 1) / stride + 1;
}

std::vector<WindowSpan> window_spans(std::size_t frames,
                                     const WindowConfig& cfg) {
  cfg.validate();
  const std::size_t count = sparse_length(frames, cfg.stride);
  std::vector<WindowSpan> spans(count);
  for (std::size_t w = 0; w < count; ++w) {
    spans[w].begin = w * cfg.stride;
    spans[w].end = std::min(spans[w].begin + cfg.length, frames);
  }
  return spans;
}

SparseParams SparseParams::init(const WindowConfig& cfg, std::size_t hidden_dim,
                                Rng& rng) {
  SparseParams p;
  switch (cfg.strategy) {
    case Strategy::AbsoluteAverage:
      break;
    case Strategy::LearnedCoefficients: {
      // Starts near the uniform average, unnormalized from then on.
      std::vector<double> w(cfg.length);
      for (auto& v : w) v = 1.0 / double(cfg.length) + rng.uniform(-0.01, 0.01);
      p.lc_weights = Tensor::vector(std::move(w)).as_parameter();
      break;
    }
    case Strategy::SelfAttention: {
      const double bound = 1.0 / std::sqrt(double(hidden_dim));
      std::vector<double> w(hidden_dim);
      for (auto& v : w) v = rng.uniform(-bound, bound);
      p.sa_proj = Tensor::matrix(hidden_dim, 1, std::move(w)).as_parameter();
      break;
    }
  }
  return p;
}

std::vector<Tensor> decompose(const Tensor& hidden, const WindowConfig& cfg) {
  if (hidden.rank() != 2) {
    throw DimensionError("decompose: expected [T x d_h], got " +
                         shape_string(hidden.shape()));
  }
  if (hidden.dim(0) == 0) throw EmptyInputError("decompose: zero frames");
  std::vector<Tensor> windows;
  for (const auto& span : window_spans(hidden.dim(0), cfg)) {
    windows.push_back(slice_rows(hidden, span.begin, span.end));
  }
  return windows;
}

Tensor combine_ae(const Tensor& window) {
  const std::size_t n = window.dim(0);
  if (n == 0) throw EmptyInputError("combine_ae: empty window");
  return weighted_rows(window, Tensor::full({n}, 1.0 / double(n)));
}

Tensor combine_lc(const Tensor& window, const Tensor& weights) {
  const std::size_t n = window.dim(0);
  if (n == 0) throw EmptyInputError("combine_lc: empty window");
  if (n > weights.numel()) {
    throw ContractError("combine_lc: window of " + std::to_string(n) +
                        " frames exceeds " + std::to_string(weights.numel()) +
                        " coefficients");
  }
  const Tensor w = n == weights.numel() ? weights : slice(weights, 0, n);
  return weighted_rows(window, w);
}

Tensor attention_weights(const Tensor& window, const SparseParams& params) {
  const std::size_t n = window.dim(0);
  if (n == 0) throw EmptyInputError("combine_sa: empty window");
  if (!params.sa_proj.defined()) {
    throw ContractError("combine_sa: attention parameters not initialized");
  }
  // A score bias would cancel in the softmax, so the projection has none.
  return softmax(reshape(matmul(window, params.sa_proj), {n}), 0);
}

Tensor combine_sa(const Tensor& window, const SparseParams& params) {
  return weighted_rows(window, attention_weights(window, params));
}

Tensor sparsify(const Tensor& hidden, const WindowConfig& cfg,
                const SparseParams& params) {
  if (hidden.rank() != 2) {
    throw DimensionError("sparsify: expected [T x d_h], got " +
                         shape_string(hidden.shape()));
  }
  if (hidden.dim(0) == 0) throw EmptyInputError("sparsify: zero frames");
  cfg.validate();
  // Single-frame windows: every strategy's weighted average of one frame is
  // that frame, so the block reduces to frame selection.
  if (cfg.length == 1) {
    if (cfg.stride == 1) return hidden;
    std::vector<Tensor> rows;
    for (const auto& span : window_spans(hidden.dim(0), cfg)) {
      rows.push_back(row(hidden, span.begin));
    }
    return stack_rows(rows);
  }
  std::vector<Tensor> rows;
  for (const auto& window : decompose(hidden, cfg)) {
    switch (cfg.strategy) {
      case Strategy::AbsoluteAverage:
        rows.push_back(combine_ae(window));
        break;
      case Strategy::LearnedCoefficients:
        rows.push_back(combine_lc(window, params.lc_weights));
        break;
      case Strategy::SelfAttention:
        rows.push_back(combine_sa(window, params));
        break;
    }
  }
  return stack_rows(rows);
}

}  // namespace tst
