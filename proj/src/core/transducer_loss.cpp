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

#include "tst/transducer_loss.hpp"

#include <cmath>
#include <vector>

#include "tst/error.hpp"
#include "tst/ops.hpp"

namespace tst {

namespace {

void check_target(const LabelSeq& target, std::size_t vocab) {
  for (Label y : target) {
    if (y == kBlank) {
      throw ContractError("target contains the blank symbol");
    }
    if (y < 0 || std::size_t(y) >= vocab) {
      throw ContractError("target label " + std::to_string(y) +
                          " outside vocabulary of size " +
                          std::to_string(vocab));
    }
  }
}

}  // namespace

LatticeView::LatticeView(Tensor log_probs, std::size_t frames,
                         std::size_t target_len)
    : log_probs_(std::move(log_probs)),
      frames_(frames),
      target_len_(target_len),
      vocab_(0) {
  if (frames_ == 0) throw EmptyInputError("lattice with zero frames");
  if (log_probs_.rank() != 2 ||
      log_probs_.dim(0) != frames_ * (target_len_ + 1)) {
    throw DimensionError("lattice of " + std::to_string(frames_) + "x" +
                         std::to_string(target_len_ + 1) +
                         " points cannot view " +
                         shape_string(log_probs_.shape()));
  }
  vocab_ = log_probs_.dim(1);
}

LatticeView build_lattice(const Transducer& model, const Tensor& sparse_hidden,
                          const LabelSeq& target) {
  const Tensor predictions = model.prediction_sequence(target);
  return LatticeView(
      joint_lattice(sparse_hidden, predictions, model.joint_params()),
      sparse_hidden.dim(0), target.size());
}

Tensor transducer_nll(const LatticeView& lattice, const LabelSeq& target) {
  const std::size_t T = lattice.frames();
  const std::size_t U = target.size();
  if (U != lattice.target_len()) {
    throw DimensionError("target length " + std::to_string(U) +
                         " does not match lattice built for " +
                         std::to_string(lattice.target_len()));
  }
  check_target(target, lattice.vocab());

  // Pull the blank and next-label log-probs out of the lattice in two nodes so
  // the recursion below only touches small tensors.
  std::vector<std::size_t> blank_idx, label_idx;
  blank_idx.reserve(T * (U + 1));
  label_idx.reserve(T * U);
  for (std::size_t t = 1; t <= T; ++t)
    for (std::size_t u = 0; u <= U; ++u) {
      blank_idx.push_back(lattice.index(t, u, kBlank));
      if (u < U) label_idx.push_back(lattice.index(t, u, std::size_t(target[u])));
    }
  const Tensor blank = gather(lattice.log_probs(), blank_idx);
  const Tensor label = U > 0 ? gather(lattice.log_probs(), label_idx) : Tensor();
  auto blank_at = [&](std::size_t t, std::size_t u) {
    return element(blank, (t - 1) * (U + 1) + u);
  };
  auto label_at = [&](std::size_t t, std::size_t u) {
    return element(label, (t - 1) * U + u);
  };

  // alpha[t][u], t in [1, T], u in [0, U]; alpha(1, 0) = 0.
  std::vector<std::vector<Tensor>> alpha(T + 1, std::vector<Tensor>(U + 1));
  alpha[1][0] = Tensor::scalar(0.0);
  for (std::size_t u = 1; u <= U; ++u) {
    alpha[1][u] = add(alpha[1][u - 1], label_at(1, u - 1));
  }
  for (std::size_t t = 2; t <= T; ++t) {
    alpha[t][0] = add(alpha[t - 1][0], blank_at(t - 1, 0));
    for (std::size_t u = 1; u <= U; ++u) {
      const Tensor from_blank = add(alpha[t - 1][u], blank_at(t - 1, u));
      const Tensor from_label = add(alpha[t][u - 1], label_at(t, u - 1));
      alpha[t][u] = logsumexp(concat({from_blank, from_label}));
    }
  }
  return neg(add(alpha[T][U], blank_at(T, U)));
}

std::size_t alignment_count(std::size_t frames, std::size_t target_len) {
  // Interleavings of U label moves with T'-1 frame advances.
  std::size_t n = frames - 1 + target_len;
  std::size_t k = target_len;
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

double brute_force_nll(const LatticeView& lattice, const LabelSeq& target) {
  const std::size_t T = lattice.frames();
  const std::size_t U = target.size();
  if (T > 6 || U > 4) {
    throw ContractError("brute_force_nll: instance too large (T'=" +
                        std::to_string(T) + ", U=" + std::to_string(U) + ")");
  }
  if (U != lattice.target_len()) {
    throw DimensionError("brute_force_nll: target length mismatch");
  }
  check_target(target, lattice.vocab());

  // Walk every monotone path from (1,0) to (T,U), then emit the final blank.
  long double total = 0.0L;
  struct Walker {
    const LatticeView& lat;
    const LabelSeq& y;
    std::size_t T, U;
    long double& total;
    void walk(std::size_t t, std::size_t u, long double prob) {
      if (t == T && u == U) {
        total += prob * std::exp(static_cast<long double>(lat.lp(t, u, kBlank)));
        return;
      }
      if (u < U) {
        walk(t, u + 1,
             prob * std::exp(static_cast<long double>(
                        lat.lp(t, u, std::size_t(y[u])))));
      }
      if (t < T) {
        walk(t + 1, u,
             prob * std::exp(static_cast<long double>(lat.lp(t, u, kBlank))));
      }
    }
  } walker{lattice, target, T, U, total};
  walker.walk(1, 0, 1.0L);
  return static_cast<double>(-std::log(total));
}

Tensor utterance_loss(const Transducer& model, const Tensor& features,
                      const LabelSeq& target) {
  const Tensor hidden = model.sparse_hidden(features);
  return transducer_nll(build_lattice(model, hidden, target), target);
}

}  // namespace tst
