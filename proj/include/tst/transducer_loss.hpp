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

// Log-probabilities at every (t, u) lattice point, stored as a
// [(T' * (U+1)) x V] tensor. Frames are 1-based in the accessors, matching
// the forward recursion.
class LatticeView {
 public:
  LatticeView(Tensor log_probs, std::size_t frames, std::size_t target_len);

  std::size_t frames() const { return frames_; }
  std::size_t target_len() const { return target_len_; }
  std::size_t vocab() const { return vocab_; }
  const Tensor& log_probs() const { return log_probs_; }

  // Flat index of lp(t, u)[k] for t in [1, T'], u in [0, U].
  std::size_t index(std::size_t t, std::size_t u, std::size_t k) const {
    return ((t - 1) * (target_len_ + 1) + u) * vocab_ + k;
  }
  double lp(std::size_t t, std::size_t u, std::size_t k) const {
    return log_probs_[index(t, u, k)];
  }

 private:
  Tensor log_probs_;
  std::size_t frames_;
  std::size_t target_len_;
  std::size_t vocab_;
};

// Builds the lattice for one utterance from sparse hidden states.
LatticeView build_lattice(const Transducer& model, const Tensor& sparse_hidden,
                          const LabelSeq& target);

// -ln P(target | lattice) via the log-space forward recursion, recorded in the
// autodiff graph.
Tensor transducer_nll(const LatticeView& lattice, const LabelSeq& target);

// Same quantity by explicit enumeration of every alignment path. Only for
// T' <= 6 and U <= 4.
double brute_force_nll(const LatticeView& lattice, const LabelSeq& target);

// Number of alignment paths enumerated by brute_force_nll: C(T'-1+U, U).
std::size_t alignment_count(std::size_t frames, std::size_t target_len);

// Full pipeline loss for one utterance.
Tensor utterance_loss(const Transducer& model, const Tensor& features,
                      const LabelSeq& target);

}  // namespace tst
