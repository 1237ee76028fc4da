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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support/test_support.hpp"
#include "tst/error.hpp"
#include "tst/ops.hpp"
#include "tst/transducer_loss.hpp"

namespace tst {
namespace {

using testing::random_labels;
using testing::random_log_probs;

// Sum over alignment paths by recursion over the lattice, in long double.
// Independent of both the forward DP and brute_force_nll.
long double path_sum(const LatticeView& lat, const LabelSeq& y, std::size_t t,
                     std::size_t u) {
  const std::size_t T = lat.frames(), U = y.size();
  const long double blank = std::exp((long double)lat.lp(t, u, kBlank));
  long double total = 0.0L;
  if (t == T && u == U) return blank;
  if (t < T) total += blank * path_sum(lat, y, t + 1, u);
  if (u < U) {
    total += std::exp((long double)lat.lp(t, u, std::size_t(y[u]))) *
             path_sum(lat, y, t, u + 1);
  }
  return total;
}

double oracle_nll(const LatticeView& lat, const LabelSeq& y) {
  return double(-std::log(path_sum(lat, y, 1, 0)));
}

LatticeView random_lattice(std::size_t frames, std::size_t U, std::size_t V,
                           Rng& rng) {
  return LatticeView(random_log_probs(frames * (U + 1), V, rng), frames, U);
}

TEST(Loss, SingleFrameEmptyTarget) {
  Rng rng(1);
  const auto lat = random_lattice(1, 0, 3, rng);
  EXPECT_DOUBLE_EQ(transducer_nll(lat, {}).item(), -lat.lp(1, 0, kBlank));
  EXPECT_DOUBLE_EQ(brute_force_nll(lat, {}), -lat.lp(1, 0, kBlank));
}

TEST(Loss, TwoFramesOneLabelByTwoPaths) {
  Rng rng(2);
  const auto lat = random_lattice(2, 1, 4, rng);
  const LabelSeq y = {2};
  auto p = [&](std::size_t t, std::size_t u, std::size_t k) {
    return std::exp((long double)lat.lp(t, u, k));
  };
  const long double two_paths = p(1, 0, 0) * p(2, 0, 2) * p(2, 1, 0) +
                                p(1, 0, 2) * p(1, 1, 0) * p(2, 1, 0);
  EXPECT_NEAR(transducer_nll(lat, y).item(), double(-std::log(two_paths)), 1e-12);
}

TEST(Loss, UniformLatticeClosedForm) {
  for (std::size_t V : {2u, 3u, 5u, 29u}) {
    const auto lp = Tensor::full({4, V}, -std::log(double(V)));
    const LatticeView lat(lp, 2, 1);
    const double expected = 3 * std::log(double(V)) - std::log(2.0);
    EXPECT_NEAR(transducer_nll(lat, {1}).item(), expected, 1e-12);
  }
}

TEST(Loss, AlignmentCount) {
  EXPECT_EQ(alignment_count(3, 2), 6u);
  EXPECT_EQ(alignment_count(1, 0), 1u);
  EXPECT_EQ(alignment_count(2, 1), 2u);
  EXPECT_EQ(alignment_count(6, 4), 126u);
}

TEST(Loss, DpMatchesOracles) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto T = std::size_t(rng.integer(1, 6));
    const auto U = std::size_t(rng.integer(0, 4));
    const auto V = std::size_t(rng.integer(2, 4));
    const auto lat = random_lattice(T, U, V, rng);
    const auto y = random_labels(U, V, rng);
    const double dp = transducer_nll(lat, y).item();
    EXPECT_NEAR(dp, brute_force_nll(lat, y), 1e-9);
    EXPECT_NEAR(dp, oracle_nll(lat, y), 1e-9);
  }
}

TEST(Loss, BruteForceRejectsLargeInstances) {
  Rng rng(4);
  EXPECT_THROW(brute_force_nll(random_lattice(7, 1, 3, rng), {1}), ContractError);
  EXPECT_THROW(brute_force_nll(random_lattice(2, 5, 3, rng), {1, 2, 1, 2, 1}),
               ContractError);
}

TEST(Loss, Errors) {
  Rng rng(5);
  const auto lat = random_lattice(2, 2, 3, rng);
  EXPECT_THROW(transducer_nll(lat, {1, 0}), ContractError);
  EXPECT_THROW(transducer_nll(lat, {1, 3}), ContractError);
  EXPECT_THROW(transducer_nll(lat, {1}), DimensionError);
  EXPECT_THROW(LatticeView(Tensor::zeros({0, 3}), 0, 0), EmptyInputError);
  EXPECT_THROW(LatticeView(Tensor::zeros({5, 3}), 2, 2), DimensionError);
}

TEST(Loss, GradientWrtLatticeMatchesFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto V = std::size_t(rng.integer(2, 5));
    const auto lp = random_log_probs(3 * 3, V, rng).as_parameter();
    const auto y = random_labels(2, V, rng);
    const auto grad = backward(transducer_nll(LatticeView(lp, 3, 2), y)).of(lp);
    const auto numeric = testing::numeric_gradient(
        [&](const Tensor& moved) {
          return transducer_nll(LatticeView(moved, 3, 2), y).item();
        },
        lp);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double denom = std::max({std::abs(grad[i]), std::abs(numeric[i]), 1e-3});
      EXPECT_LT(std::abs(grad[i] - numeric[i]) / denom, 1e-4);
    }
  }
}

TEST(Loss, NonNegative) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto T = std::size_t(rng.integer(1, 10));
    const auto U = std::size_t(rng.integer(0, 6));
    const auto V = std::size_t(rng.integer(2, 6));
    EXPECT_GE(transducer_nll(random_lattice(T, U, V, rng),
                             random_labels(U, V, rng))
                  .item(),
              0.0);
  }
}

TEST(Loss, SensitiveToTargetOrder) {
  Rng rng(8);
  const auto lat = random_lattice(4, 3, 4, rng);
  const double a = transducer_nll(lat, {1, 2, 3}).item();
  const double b = transducer_nll(lat, {3, 1, 2}).item();
  EXPECT_GT(std::abs(a - b), 1e-6);
}

TEST(Loss, PipelineLossMatchesLatticeOracle) {
  const WindowConfig cfg{3, 2, Strategy::AbsoluteAverage};
  const auto model = Transducer::init(testing::tiny_dims(), cfg, 9);
  Rng rng(10);
  const auto x = testing::random_tensor({9, 3}, rng);
  const LabelSeq y = {1, 3};
  const auto hidden = model.sparse_hidden(x);
  ASSERT_EQ(hidden.dim(0), 5u);
  const auto lat = build_lattice(model, hidden, y);
  EXPECT_NEAR(utterance_loss(model, x, y).item(), oracle_nll(lat, y), 1e-10);
}

}  // namespace
}  // namespace tst
