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

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "support/test_support.hpp"
#include "tst/error.hpp"
#include "tst/ops.hpp"
#include "tst/synth_data.hpp"

namespace tst {
namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("tst_synth_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path write(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream(path) << text;
    return path;
  }

  std::filesystem::path dir_;
};

TEST(Generate, NoiselessFramesAreExactPrototypes) {
  TaskSpec task;
  task.noise = 0.0;
  task.frames_per_label = 1;
  task.count = 50;
  const auto data = generate(task, 3);
  std::size_t errors = 0;
  for (const auto& utt : data) {
    ASSERT_EQ(utt.features.dim(0), utt.labels.size());
    for (std::size_t f = 0; f < utt.labels.size(); ++f) {
      // Nearest-prototype classification.
      Label best = 1;
      double best_d = INFINITY;
      for (Label k = 1; k < Label(task.vocab); ++k) {
        const auto p = prototype(k, task.input_dim);
        double d = 0.0;
        for (std::size_t j = 0; j < task.input_dim; ++j) {
          d += std::pow(utt.features.at(f, j) - p[j], 2);
        }
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (best != utt.labels[f] || best_d != 0.0) ++errors;
    }
  }
  EXPECT_EQ(errors, 0u);
}

TEST(Generate, DeterministicInSeed) {
  TaskSpec task;
  task.count = 20;
  const auto a = generate(task, 42);
  const auto b = generate(task, 42);
  const auto c = generate(task, 43);
  ASSERT_EQ(a.size(), b.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].labels, b[i].labels);
    EXPECT_TRUE(testing::bit_identical(a[i].features, b[i].features));
    if (a[i].labels != c[i].labels) any_diff = true;
  }
  EXPECT_TRUE(any_diff);
}

TEST(Generate, Shape) {
  TaskSpec task;
  task.count = 100;
  for (const auto& utt : generate(task, 5)) {
    EXPECT_GE(utt.labels.size(), task.min_labels);
    EXPECT_LE(utt.labels.size(), task.max_labels);
    EXPECT_EQ(utt.features.dim(0), utt.labels.size() * task.frames_per_label);
    EXPECT_EQ(utt.features.dim(1), task.input_dim);
    for (std::size_t i = 0; i < utt.labels.size(); ++i) {
      EXPECT_GE(utt.labels[i], 1);
      EXPECT_LT(utt.labels[i], Label(task.vocab));
      if (i) EXPECT_NE(utt.labels[i], utt.labels[i - 1]);
    }
  }
}

TEST(Generate, AverageOfNoiselessSegmentIsPrototype) {
  TaskSpec task;
  task.noise = 0.0;
  task.count = 10;
  for (const auto& utt : generate(task, 6)) {
    const auto out = sparsify(utt.features, {4, 4}, {});
    ASSERT_EQ(out.dim(0), utt.labels.size());
    for (std::size_t i = 0; i < utt.labels.size(); ++i) {
      EXPECT_EQ(row(out, i).to_vector(), prototype(utt.labels[i], task.input_dim));
    }
  }
}

TEST(Generate, VocabLargerThanInputIsContractError) {
  TaskSpec task;
  task.vocab = 10;
  task.input_dim = 8;
  EXPECT_THROW(generate(task, 1), ContractError);
}

TEST_F(TempDir, EmptyFileGivesEmptyDataset) {
  EXPECT_TRUE(load_jsonl(write("empty.jsonl", "")).empty());
}

TEST_F(TempDir, RoundTripKeepsBits) {
  TaskSpec task;
  task.count = 30;
  const auto data = generate(task, 7);
  const auto path = dir_ / "d.jsonl";
  save_jsonl(path, data);
  const auto back = load_jsonl(path);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].id, data[i].id);
    EXPECT_EQ(back[i].labels, data[i].labels);
    EXPECT_TRUE(testing::bit_identical(back[i].features, data[i].features));
  }
}

TEST_F(TempDir, SingleUtteranceRoundTrip) {
  Utterance utt{"only", Tensor::matrix(2, 2, {0.1, 1e-300, -3.5, 1.0 / 3}), {2}};
  const auto path = dir_ / "one.jsonl";
  save_jsonl(path, {utt});
  const auto back = load_jsonl(path);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(testing::bit_identical(back[0].features, utt.features));
}

TEST_F(TempDir, MalformedLineReportsLineNumber) {
  const auto path = write("bad.jsonl",
                          "{\"id\":\"a\",\"features\":[[1]],\"labels\":[1]}\n"
                          "{\"id\": oops}\n");
  try {
    load_jsonl(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST_F(TempDir, MissingFieldIsParseError) {
  EXPECT_THROW(load_jsonl(write("m.jsonl", "{\"id\":\"a\",\"labels\":[1]}\n")),
               ParseError);
}

TEST_F(TempDir, RaggedFeaturesAreSchemaError) {
  EXPECT_THROW(load_jsonl(write("r.jsonl",
                                "{\"id\":\"a\",\"features\":[[1,2],[3]],\"labels\":[1]}\n")),
               SchemaError);
}

TEST_F(TempDir, BlankLabelIsSchemaError) {
  EXPECT_THROW(load_jsonl(write("b.jsonl",
                                "{\"id\":\"a\",\"features\":[[1],[2]],\"labels\":[1,0]}\n")),
               SchemaError);
}

TEST_F(TempDir, MissingFileIsIoError) {
  EXPECT_THROW(load_jsonl(dir_ / "nope.jsonl"), IoError);
}

}  // namespace
}  // namespace tst
