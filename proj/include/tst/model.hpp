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
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tst/random.hpp"
#include "tst/tensor.hpp"
#include "tst/time_sparse.hpp"

namespace tst {

using Label = std::int32_t;
using LabelSeq = std::vector<Label>;

inline constexpr Label kBlank = 0;
// Prediction-network input before any label has been emitted. Maps onto
// embedding row 0, which blank never uses.
inline constexpr Label kStart = -1;

enum class PredictorKind { Stateless, Recurrent };
enum class Activation { Tanh, Relu };

std::string_view to_string(PredictorKind kind);
std::string_view to_string(Activation act);
PredictorKind parse_predictor(std::string_view text);
Activation parse_activation(std::string_view text);

struct ModelDims {
  std::size_t input = 8;
  std::size_t hidden = 24;
  std::size_t prediction = 8;
  std::size_t joint = 24;
  std::size_t vocab = 6;  // includes blank
  std::size_t encoder_layers = 1;
  PredictorKind predictor = PredictorKind::Stateless;
  Activation activation = Activation::Tanh;

  void validate() const;
};

struct EncoderLayer {
  Tensor w_x;  // [d_in x d_h]
  Tensor w_h;  // [d_h x d_h]
  Tensor b;    // [d_h]
};

struct EncoderParams {
  std::vector<EncoderLayer> layers;
};

struct PredictionParams {
  PredictorKind kind = PredictorKind::Stateless;
  Tensor embedding;  // [V x d_p], row 0 is the start row
  // Recurrent kind only: g = tanh(e W_in + s W_rec + b).
  Tensor w_in;   // [d_p x d_p]
  Tensor w_rec;  // [d_p x d_p]
  Tensor b;      // [d_p]
};

struct JointParams {
  Tensor w_enc;   // [d_h x d_j]
  Tensor w_pred;  // [d_p x d_j]
  Tensor b;       // [d_j]
  Tensor out;     // [d_j x V]
  Activation activation = Activation::Tanh;
};

// Recurrent prediction state; undefined for the stateless kind.
struct PredictionState {
  Tensor hidden;
};

// features[T x d_in] -> hidden[T x d_h].
Tensor encode(const Tensor& features, const EncoderParams& params);

std::pair<Tensor, PredictionState> predict_step(Label prev,
                                                const PredictionState& state,
                                                const PredictionParams& params);

// Log-probabilities over the vocabulary for one (h, g) pair.
Tensor joint(const Tensor& h, const Tensor& g, const JointParams& params);

// Log-probabilities for every (t, u) pair; row t*rows(g)+u.
Tensor joint_lattice(const Tensor& hidden, const Tensor& predictions,
                     const JointParams& params);

struct NamedParameter {
  std::string name;
  Tensor* tensor;
};

struct NamedConstParameter {
  std::string name;
  const Tensor* tensor;
};

// Encoder, time-sparse block, prediction network and joint network.
class Transducer {
 public:
  Transducer() = default;
  static Transducer init(const ModelDims& dims, const WindowConfig& window,
                         std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  const WindowConfig& window() const { return window_; }
  // Replaces the window geometry; the strategy must stay the same for LC/SA
  // since those carry parameters.
  void set_window(const WindowConfig& window);

  const EncoderParams& encoder() const { return encoder_; }
  const PredictionParams& prediction() const { return prediction_; }
  const JointParams& joint_params() const { return joint_; }
  const SparseParams& sparse() const { return sparse_; }
  SparseParams& sparse() { return sparse_; }
  JointParams& joint_params() { return joint_; }
  PredictionParams& prediction() { return prediction_; }
  EncoderParams& encoder() { return encoder_; }

  std::vector<NamedParameter> parameters();
  std::vector<NamedConstParameter> parameters() const;

  // Encoder output followed by the time-sparse block.
  Tensor sparse_hidden(const Tensor& features) const;
  // Encoder output with the time-sparse block removed.
  Tensor dense_hidden(const Tensor& features) const;
  // Prediction outputs g_0..g_U for a label sequence, [(U+1) x d_p].
  Tensor prediction_sequence(const LabelSeq& labels) const;

 private:
  ModelDims dims_;
  WindowConfig window_;
  EncoderParams encoder_;
  PredictionParams prediction_;
  JointParams joint_;
  SparseParams sparse_;
};

// Little-endian binary checkpoint: magic, format version, vocabulary size,
// then (name length, name, rank, dims, float64 payload) per parameter until
// end of file.
inline constexpr char kCheckpointMagic[8] = {'T', 'S', 'T', 'C',
                                             'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Transducer& model, const std::filesystem::path& path);
// Loads parameters into a model built from `dims`/`window`; every parameter
// must be present with matching shape.
Transducer load_checkpoint(const std::filesystem::path& path,
                           const ModelDims& dims, const WindowConfig& window);

}  // namespace tst
