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

// Reference decoders built directly on joint() and the prediction network,
// with none of the caching or pruning used by the library decoders.

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "tst/model.hpp"
#include "tst/ops.hpp"

namespace tst::testing {

inline std::vector<double> joint_at(const Transducer& model,
                                    const Tensor& hidden, std::size_t t,
                                    const LabelSeq& prefix) {
  const Tensor g = model.prediction_sequence(prefix);
  return joint(row(hidden, t), row(g, prefix.size()), model.joint_params())
      .to_vector();
}

struct ReferenceDecode {
  LabelSeq labels;
  double log_score = 0.0;
};

inline ReferenceDecode reference_greedy(const Transducer& model,
                                        const Tensor& hidden,
                                        std::size_t max_emissions) {
  ReferenceDecode out;
  for (std::size_t t = 0; t < hidden.dim(0); ++t) {
    for (std::size_t emitted = 0;; ++emitted) {
      const auto lp = joint_at(model, hidden, t, out.labels);
      std::size_t best = 0;
      for (std::size_t k = 1; k < lp.size(); ++k)
        if (lp[k] > lp[best]) best = k;
      if (best == 0 || emitted == max_emissions) {
        out.log_score += lp[0];
        break;
      }
      out.log_score += lp[best];
      out.labels.push_back(Label(best));
    }
  }
  return out;
}

// Enumerates every alignment with at most `max_emissions` labels per frame,
// sums probabilities per label sequence, and returns the most probable
// sequence with its total log-probability.
inline ReferenceDecode exhaustive_search(const Transducer& model,
                                         const Tensor& hidden,
                                         std::size_t max_emissions) {
  const std::size_t V = model.dims().vocab;
  std::map<LabelSeq, long double> mass{{LabelSeq{}, 1.0L}};
  for (std::size_t t = 0; t < hidden.dim(0); ++t) {
    std::map<LabelSeq, long double> next;
    for (const auto& [prefix, p] : mass) {
      // Depth-first over up to max_emissions labels, then blank.
      std::vector<std::pair<LabelSeq, long double>> stack{{prefix, p}};
      while (!stack.empty()) {
        auto [seq, q] = stack.back();
        stack.pop_back();
        const auto lp = joint_at(model, hidden, t, seq);
        next[seq] += q * std::exp((long double)lp[0]);
        if (seq.size() - prefix.size() == max_emissions) continue;
        for (std::size_t k = 1; k < V; ++k) {
          auto longer = seq;
          longer.push_back(Label(k));
          stack.emplace_back(std::move(longer), q * std::exp((long double)lp[k]));
        }
      }
    }
    mass = std::move(next);
  }
  ReferenceDecode best;
  long double best_p = -1.0L;
  for (const auto& [seq, p] : mass) {
    if (p > best_p) {
      best_p = p;
      best.labels = seq;
    }
  }
  best.log_score = double(std::log(best_p));
  return best;
}

}  // namespace tst::testing
