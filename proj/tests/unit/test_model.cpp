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

#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "support/test_support.hpp"
#include "tst/error.hpp"
#include "tst/model.hpp"
#include "tst/ops.hpp"

namespace tst {
namespace {

using testing::random_tensor;
using testing::tiny_dims;

using Matrix = std::vector<std::vector<double>>;

Matrix to_matrix(const Tensor& t) {
  Matrix m(t.dim(0), std::vector<double>(t.dim(1)));
  for (std::size_t r = 0; r < t.dim(0); ++r)
    for (std::size_t c = 0; c < t.dim(1); ++c) m[r][c] = t.at(r, c);
  return m;
}

// v[1 x n] * m[n x k] with plain loops.
std::vector<double> vecmat(const std::vector<double>& v, const Matrix& m) {
  std::vector<double> out(m[0].size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[i] * m[i][j];
  return out;
}

Matrix manual_encode(const Matrix& x, const EncoderParams& p) {
  Matrix in = x;
  for (const auto& layer : p.layers) {
    const auto wx = to_matrix(layer.w_x);
    const auto wh = to_matrix(layer.w_h);
    const auto b = layer.b.to_vector();
    Matrix out;
    std::vector<double> h(b.size(), 0.0);
    for (const auto& frame : in) {
      auto a = vecmat(frame, wx);
      const auto r = vecmat(h, wh);
      for (std::size_t j = 0; j < a.size(); ++j) h[j] = std::tanh(a[j] + r[j] + b[j]);
      out.push_back(h);
    }
    in = out;
  }
  return in;
}

std::vector<double> manual_joint(const std::vector<double>& h,
                                 const std::vector<double>& g,
                                 const JointParams& p) {
  auto z = vecmat(h, to_matrix(p.w_enc));
  const auto zg = vecmat(g, to_matrix(p.w_pred));
  const auto b = p.b.to_vector();
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double pre = z[j] + zg[j] + b[j];
    z[j] = p.activation == Activation::Tanh ? std::tanh(pre) : std::max(pre, 0.0);
  }
  const auto logits = vecmat(z, to_matrix(p.out));
  long double mx = *std::max_element(logits.begin(), logits.end());
  long double total = 0.0L;
  for (double l : logits) total += std::exp(l - mx);
  std::vector<double> out;
  for (double l : logits) out.push_back(double(l - mx - std::log(total)));
  return out;
}

TEST(Encode, ZeroInputZeroWeightsGivesZeros) {
  EncoderParams p;
  p.layers.push_back({Tensor::zeros({3, 4}), Tensor::zeros({4, 4}),
                      Tensor::zeros({4})});
  const auto h = encode(Tensor::zeros({5, 3}), p);
  EXPECT_EQ(h.shape(), (Shape{5, 4}));
  for (double v : h.data()) EXPECT_EQ(v, 0.0);
}

TEST(Encode, MatchesManualUnroll) {
  for (std::size_t layers : {1u, 2u}) {
    auto dims = tiny_dims();
    dims.encoder_layers = layers;
    const auto model = Transducer::init(dims, {}, 3 + layers);
    Rng rng(4);
    const auto x = random_tensor({7, dims.input}, rng);
    const auto expected = manual_encode(to_matrix(x), model.encoder());
    const auto h = encode(x, model.encoder());
    for (std::size_t t = 0; t < 7; ++t)
      for (std::size_t j = 0; j < dims.hidden; ++j)
        EXPECT_NEAR(h.at(t, j), expected[t][j], 1e-12);
  }
}

TEST(Encode, LengthPreserving) {
  const auto model = Transducer::init(tiny_dims(), {}, 5);
  Rng rng(6);
  for (std::size_t frames = 1; frames <= 30; ++frames) {
    const auto h = encode(random_tensor({frames, 3}, rng), model.encoder());
    EXPECT_EQ(h.dim(0), frames);
  }
}

TEST(Encode, Errors) {
  const auto model = Transducer::init(tiny_dims(), {}, 5);
  EXPECT_THROW(encode(Tensor::zeros({0, 3}), model.encoder()), EmptyInputError);
  EXPECT_THROW(encode(Tensor::zeros({4, 2}), model.encoder()), DimensionError);
}

TEST(Predict, StatelessStartIsRowZero) {
  const auto model = Transducer::init(tiny_dims(), {}, 7);
  const auto [g, state] = predict_step(kStart, {}, model.prediction());
  EXPECT_EQ(g.to_vector(), row(model.prediction().embedding, 0).to_vector());
  EXPECT_FALSE(state.hidden.defined());
}

TEST(Predict, StatelessSameLabelTwice) {
  const auto model = Transducer::init(tiny_dims(), {}, 7);
  const auto a = predict_step(2, {}, model.prediction()).first;
  const auto b = predict_step(2, {}, model.prediction()).first;
  EXPECT_TRUE(testing::bit_identical(a, b));
}

TEST(Predict, StatelessDependsOnlyOnPreviousLabel) {
  const auto model = Transducer::init(tiny_dims(5), {}, 8);
  const auto a = model.prediction_sequence({1, 2, 3, 4});
  const auto b = model.prediction_sequence({3, 1, 2, 4});
  EXPECT_TRUE(testing::bit_identical(row(a, 4), row(b, 4)));
  EXPECT_FALSE(testing::bit_identical(row(a, 3), row(b, 3)));
}

TEST(Predict, BlankIsContractError) {
  const auto model = Transducer::init(tiny_dims(), {}, 7);
  EXPECT_THROW(predict_step(kBlank, {}, model.prediction()), ContractError);
  EXPECT_THROW(predict_step(4, {}, model.prediction()), ContractError);
}

TEST(Predict, RecurrentMatchesManualUnroll) {
  auto dims = tiny_dims(5);
  dims.predictor = PredictorKind::Recurrent;
  const auto model = Transducer::init(dims, {}, 9);
  const auto& p = model.prediction();
  const auto emb = to_matrix(p.embedding);
  const auto w_in = to_matrix(p.w_in);
  const auto w_rec = to_matrix(p.w_rec);
  const auto b = p.b.to_vector();

  const LabelSeq labels = {3, 1, 4};
  std::vector<double> s(dims.prediction, 0.0);
  Matrix expected;
  for (std::size_t u = 0; u <= labels.size(); ++u) {
    const std::size_t idx = u == 0 ? 0 : std::size_t(labels[u - 1]);
    auto a = vecmat(emb[idx], w_in);
    const auto r = vecmat(s, w_rec);
    for (std::size_t j = 0; j < a.size(); ++j) s[j] = std::tanh(a[j] + r[j] + b[j]);
    expected.push_back(s);
  }
  const auto g = model.prediction_sequence(labels);
  ASSERT_EQ(g.dim(0), labels.size() + 1);
  for (std::size_t u = 0; u < expected.size(); ++u)
    for (std::size_t j = 0; j < dims.prediction; ++j)
      EXPECT_NEAR(g.at(u, j), expected[u][j], 1e-12);

  // History matters for the recurrent kind.
  const auto other = model.prediction_sequence({1, 3, 4});
  EXPECT_FALSE(testing::bit_identical(row(g, 3), row(other, 3)));
}

TEST(Joint, ZeroWeightsGiveUniform) {
  JointParams p;
  p.w_enc = Tensor::zeros({4, 5});
  p.w_pred = Tensor::zeros({3, 5});
  p.b = Tensor::zeros({5});
  p.out = Tensor::zeros({5, 6});
  Rng rng(1);
  const auto lp = joint(random_tensor({4}, rng), random_tensor({3}, rng), p);
  for (double v : lp.data()) EXPECT_NEAR(v, -std::log(6.0), 1e-15);
}

TEST(Joint, MatchesManualComputation) {
  for (auto act : {Activation::Tanh, Activation::Relu}) {
    auto dims = tiny_dims();
    dims.activation = act;
    const auto model = Transducer::init(dims, {}, 11);
    Rng rng(12);
    const auto h = random_tensor({dims.hidden}, rng);
    const auto g = random_tensor({dims.prediction}, rng);
    const auto expected =
        manual_joint(h.to_vector(), g.to_vector(), model.joint_params());
    const auto lp = joint(h, g, model.joint_params());
    for (std::size_t k = 0; k < dims.vocab; ++k) EXPECT_NEAR(lp[k], expected[k], 1e-12);
  }
}

TEST(Joint, ValidLogDistributionEverywhere) {
  const auto model = Transducer::init(tiny_dims(5), {}, 13);
  Rng rng(14);
  const auto hidden = random_tensor({10, 4}, rng, -3, 3);
  const auto preds = random_tensor({10, 3}, rng, -3, 3);
  const auto lattice = joint_lattice(hidden, preds, model.joint_params());
  ASSERT_EQ(lattice.shape(), (Shape{100, 5}));
  for (std::size_t r = 0; r < 100; ++r) {
    double total = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_LE(lattice.at(r, k), 0.0);
      total += std::exp(lattice.at(r, k));
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  // Row t*U+u of the lattice equals joint(h_t, g_u).
  const auto single = joint(row(hidden, 3), row(preds, 7), model.joint_params());
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(lattice.at(37, k), single[k], 1e-14);
}

TEST(Joint, DimensionMismatch) {
  const auto model = Transducer::init(tiny_dims(), {}, 15);
  EXPECT_THROW(joint(Tensor::zeros({3}), Tensor::zeros({3}), model.joint_params()),
               DimensionError);
  EXPECT_THROW(joint(Tensor::zeros({4}), Tensor::zeros({4}), model.joint_params()),
               DimensionError);
}

TEST(Transducer, InitIsDeterministic) {
  const auto a = Transducer::init(tiny_dims(), {2, 2, Strategy::SelfAttention}, 99);
  const auto b = Transducer::init(tiny_dims(), {2, 2, Strategy::SelfAttention}, 99);
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_TRUE(testing::bit_identical(*pa[i].tensor, *pb[i].tensor));
  }
}

TEST(Transducer, DimsValidation) {
  auto dims = tiny_dims();
  dims.encoder_layers = 3;
  EXPECT_THROW(Transducer::init(dims, {}, 1), ConfigError);
  dims = tiny_dims();
  dims.vocab = 1;
  EXPECT_THROW(Transducer::init(dims, {}, 1), ConfigError);
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("tst_ckpt_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CheckpointTest, RoundTripIsExact) {
  auto dims = tiny_dims();
  dims.predictor = PredictorKind::Recurrent;
  dims.encoder_layers = 2;
  const WindowConfig window{3, 2, Strategy::LearnedCoefficients};
  const auto model = Transducer::init(dims, window, 21);
  const auto path = dir_ / "m.ckpt";
  save_checkpoint(model, path);
  const auto loaded = load_checkpoint(path, dims, window);
  const auto pa = model.parameters();
  const auto pb = loaded.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_TRUE(testing::bit_identical(*pa[i].tensor, *pb[i].tensor)) << pa[i].name;
    EXPECT_TRUE(pb[i].tensor->requires_grad());
  }
}

TEST_F(CheckpointTest, HeaderLayout) {
  const auto model = Transducer::init(tiny_dims(), {}, 22);
  const auto path = dir_ / "m.ckpt";
  save_checkpoint(model, path);
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  std::uint32_t version = 0, vocab = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&vocab), 4);
  EXPECT_EQ(std::string(magic, 7), "TSTCKPT");
  EXPECT_EQ(version, 1u);
  EXPECT_EQ(vocab, 4u);
}

TEST_F(CheckpointTest, IncompatibleDimsRejected) {
  const auto model = Transducer::init(tiny_dims(), {}, 23);
  const auto path = dir_ / "m.ckpt";
  save_checkpoint(model, path);
  auto wider = tiny_dims();
  wider.hidden = 6;
  EXPECT_THROW(load_checkpoint(path, wider, {}), CheckpointError);
  EXPECT_THROW(load_checkpoint(path, tiny_dims(5), {}), CheckpointError);
  EXPECT_THROW(load_checkpoint(path, tiny_dims(), {2, 2, Strategy::SelfAttention}),
               CheckpointError);
}

TEST_F(CheckpointTest, CorruptFilesRejected) {
  const auto path = dir_ / "bad.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(load_checkpoint(path, tiny_dims(), {}), CheckpointError);

  const auto good = dir_ / "good.ckpt";
  save_checkpoint(Transducer::init(tiny_dims(), {}, 24), good);
  const auto size = std::filesystem::file_size(good);
  std::filesystem::copy_file(good, path, std::filesystem::copy_options::overwrite_existing);
  std::filesystem::resize_file(path, size - 5);
  EXPECT_THROW(load_checkpoint(path, tiny_dims(), {}), CheckpointError);

  EXPECT_THROW(load_checkpoint(dir_ / "missing.ckpt", tiny_dims(), {}), Error);
}

}  // namespace
}  // namespace tst
