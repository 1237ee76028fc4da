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
#include <string>

#include "tst/error.hpp"
#include "tst/metrics.hpp"
#include "tst/random.hpp"

namespace tst {
namespace {

LabelSeq chars(const std::string& s) { return LabelSeq(s.begin(), s.end()); }

// Plain exponential recursion over edit operations.
std::size_t recursive_distance(const LabelSeq& a, std::size_t i,
                               const LabelSeq& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return recursive_distance(a, i + 1, b, j + 1);
  return 1 + std::min({recursive_distance(a, i + 1, b, j),
                       recursive_distance(a, i, b, j + 1),
                       recursive_distance(a, i + 1, b, j + 1)});
}

std::size_t distance(const LabelSeq& a, const LabelSeq& b) {
  return edit_distance(a, b).distance;
}

LabelSeq random_seq(Rng& rng, std::size_t max_len, int alphabet) {
  LabelSeq s(std::size_t(rng.integer(0, std::int64_t(max_len))));
  for (auto& v : s) v = Label(rng.integer(1, alphabet));
  return s;
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(distance(chars("abc"), chars("abc")), 0u);
  const auto one = edit_distance(chars("abc"), chars("axc"));
  EXPECT_EQ(one.distance, 1u);
  EXPECT_EQ(one.substitutions, 1u);
  EXPECT_EQ(distance(chars("kitten"), chars("sitting")), 3u);
  EXPECT_EQ(recursive_distance(chars("kitten"), 0, chars("sitting"), 0), 3u);
}

TEST(EditDistance, OperationCounts) {
  const auto ins = edit_distance(chars("ac"), chars("abc"));
  EXPECT_EQ(ins.insertions, 1u);
  EXPECT_EQ(ins.deletions, 0u);
  const auto del = edit_distance(chars("abc"), chars("ac"));
  EXPECT_EQ(del.deletions, 1u);
  EXPECT_EQ(del.insertions, 0u);
  const auto empty = edit_distance(chars("abcd"), {});
  EXPECT_EQ(empty.deletions, 4u);
}

TEST(EditDistance, ExhaustiveAgainstRecursion) {
  // Every pair of sequences up to length 5 over a 3-symbol alphabet.
  std::vector<LabelSeq> all{{}};
  for (std::size_t len = 1; len <= 5; ++len) {
    const auto prev = all;
    for (const auto& s : prev) {
      if (s.size() != len - 1) continue;
      for (Label k = 1; k <= 3; ++k) {
        auto t = s;
        t.push_back(k);
        all.push_back(t);
      }
    }
  }
  ASSERT_EQ(all.size(), 364u);
  std::size_t mismatches = 0;
  for (const auto& a : all)
    for (const auto& b : all) {
      const auto s = edit_distance(a, b);
      if (s.distance != recursive_distance(a, 0, b, 0)) ++mismatches;
      if (s.distance != s.substitutions + s.insertions + s.deletions) ++mismatches;
    }
  EXPECT_EQ(mismatches, 0u);
}

TEST(EditDistance, MetricProperties) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_seq(rng, 6, 3);
    const auto y = random_seq(rng, 6, 3);
    const auto z = random_seq(rng, 6, 3);
    EXPECT_EQ(distance(x, y), distance(y, x));
    EXPECT_EQ(distance(x, y), recursive_distance(x, 0, y, 0));
    EXPECT_LE(distance(x, z), distance(x, y) + distance(y, z));
  }
}

TEST(Cer, Examples) {
  const std::vector<LabelSeq> refs = {chars("ab"), chars("cd")};
  EXPECT_EQ(cer(refs, refs), 0.0);
  EXPECT_EQ(cer(refs, {{}, {}}), 100.0);
  EXPECT_EQ(cer(refs, {chars("ab"), chars("cx")}), 25.0);
}

TEST(Cer, Errors) {
  EXPECT_THROW(cer({chars("a")}, {}), ContractError);
  EXPECT_THROW(cer({{}}, {chars("a")}), ContractError);
}

TEST(Cer, InvariantUnderRelabeling) {
  Rng rng(2);
  const std::vector<Label> perm = {0, 4, 2, 5, 1, 3};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabelSeq> refs, hyps, refs2, hyps2;
    for (int i = 0; i < 5; ++i) {
      auto r = random_seq(rng, 8, 5);
      r.push_back(1);
      const auto h = random_seq(rng, 8, 5);
      refs.push_back(r);
      hyps.push_back(h);
      for (auto& v : r) v = perm[v];
      auto h2 = h;
      for (auto& v : h2) v = perm[v];
      refs2.push_back(r);
      hyps2.push_back(h2);
    }
    EXPECT_EQ(cer(refs, hyps), cer(refs2, hyps2));
  }
}

TEST(Rtf, Examples) {
  EXPECT_DOUBLE_EQ(rtf(0.5, 100), 0.5);
  EXPECT_DOUBLE_EQ(rtf(2.0, 200), 1.0);
  EXPECT_DOUBLE_EQ(rtf(1.22, 1000), 0.122);
  EXPECT_DOUBLE_EQ(rtf(0.5, 100, 20.0), 0.25);
  EXPECT_THROW(rtf(0.0, 100), ContractError);
  EXPECT_THROW(rtf(-1.0, 100), ContractError);
}

TEST(LatticeCost, Examples) {
  const auto dense = lattice_cost(100, 9, {1, 1});
  EXPECT_EQ(dense.sparse_frames, 100u);
  EXPECT_EQ(dense.cells, 1000u);
  EXPECT_EQ(dense.reduction, 1.0);
  const auto ten = lattice_cost(100, 9, {10, 10});
  EXPECT_EQ(ten.sparse_frames, 10u);
  EXPECT_EQ(ten.cells, 100u);
  EXPECT_DOUBLE_EQ(ten.reduction, 0.10);
  const auto four = lattice_cost(100, 9, {4, 4});
  EXPECT_EQ(four.sparse_frames, 25u);
  EXPECT_EQ(four.cells, 250u);
  EXPECT_DOUBLE_EQ(four.reduction, 0.25);
}

TEST(LatticeCost, RatioBounds) {
  for (std::size_t T = 1; T <= 120; ++T) {
    for (std::size_t S = 1; S <= 10; ++S) {
      const auto c = lattice_cost(T, 3, {S, S});
      const double lower = 1.0 / double(S);
      if (T % S == 0) EXPECT_DOUBLE_EQ(c.reduction, lower);
      EXPECT_GE(c.reduction, lower - 1e-15);
      EXPECT_LE(c.reduction, lower + 1.0 / double(T) + 1e-15);
    }
  }
}

TEST(Report, CsvRowMatchesHeaderColumns) {
  EvalReport r;
  r.config_id = "00ff";
  r.window_length = 4;
  r.window_stride = 2;
  r.strategy = "sa";
  r.decoder = "beam";
  r.beam = 8;
  r.cer_percent = 1.5;
  r.rtf = 0.01;
  r.lattice_cells = 123;
  r.joint_calls = 456;
  r.wall_ms = 7.25;
  const auto row = to_csv_row(r);
  EXPECT_EQ(row, "00ff,4,2,sa,beam,8,1.500000,0.01,123,456,7.250");
  const std::string header = kCsvHeader;
  EXPECT_EQ(std::count(row.begin(), row.end(), ','),
            std::count(header.begin(), header.end(), ','));
}

}  // namespace
}  // namespace tst
