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

#include "tst/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "tst/error.hpp"
#include "tst/ops.hpp"

namespace tst {

std::string_view to_string(PredictorKind kind) {
  return kind == PredictorKind::Stateless ? "stateless" : "recurrent";
}

std::string_view to_string(Activation act) {
  return act == Activation::Tanh ? "tanh" : "relu";
}

PredictorKind parse_predictor(std::string_view text) {
  if (text == "stateless") return PredictorKind::Stateless;
  if (text == "recurrent") return PredictorKind::Recurrent;
  throw ConfigError("unknown predictor '" + std::string(text) +
                    "' (expected stateless or recurrent)");
}

Activation parse_activation(std::string_view text) {
  if (text == "tanh") return Activation::Tanh;
  if (text == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + std::string(text) +
                    "' (expected tanh or relu)");
}

void ModelDims::validate() const {
  if (input < 1 || hidden < 1 || prediction < 1 || joint < 1) {
    throw ConfigError("model dimensions must be >= 1");
  }
  if (vocab < 2) throw ConfigError("vocabulary needs blank plus >= 1 label");
  if (encoder_layers < 1 || encoder_layers > 2) {
    throw ConfigError("encoder_layers must be 1 or 2");
  }
}

Tensor encode(const Tensor& features, const EncoderParams& params) {
  if (features.rank() != 2) {
    throw DimensionError("encode: expected [T x d_in], got " +
                         shape_string(features.shape()));
  }
  const std::size_t frames = features.dim(0);
  if (frames == 0) throw EmptyInputError("encode: zero frames");
  Tensor x = features;
  for (const auto& layer : params.layers) {
    if (x.dim(1) != layer.w_x.dim(0)) {
      throw DimensionError("encode: input " + shape_string(x.shape()) +
                           " does not match W_x " +
                           shape_string(layer.w_x.shape()));
    }
    const std::size_t hidden = layer.w_x.dim(1);
    const Tensor projected = add_rowwise(matmul(x, layer.w_x), layer.b);
    std::vector<Tensor> states;
    states.reserve(frames);
    states.push_back(tanh(row(projected, 0)));
    for (std::size_t t = 1; t < frames; ++t) {
      const Tensor prev = reshape(states.back(), {1, hidden});
      const Tensor recur = reshape(matmul(prev, layer.w_h), {hidden});
      states.push_back(tanh(add(row(projected, t), recur)));
    }
    x = stack_rows(states);
  }
  return x;
}

std::pair<Tensor, PredictionState> predict_step(
    Label prev, const PredictionState& state, const PredictionParams& params) {
  if (prev == kBlank) {
    throw ContractError("predict_step: blank never feeds the prediction network");
  }
  const std::size_t vocab = params.embedding.dim(0);
  if (prev != kStart && (prev < 1 || std::size_t(prev) >= vocab)) {
    throw ContractError("predict_step: label " + std::to_string(prev) +
                        " outside [1, " + std::to_string(vocab - 1) + "]");
  }
  const std::size_t index = prev == kStart ? 0 : std::size_t(prev);
  Tensor embedded = row(params.embedding, index);
  if (params.kind == PredictorKind::Stateless) {
    return {embedded, PredictionState{}};
  }
  const std::size_t dp = params.w_in.dim(1);
  Tensor pre = reshape(matmul(reshape(embedded, {1, embedded.numel()}),
                              params.w_in),
                       {dp});
  if (state.hidden.defined()) {
    pre = add(pre, reshape(matmul(reshape(state.hidden, {1, dp}), params.w_rec),
                           {dp}));
  }
  Tensor g = tanh(add(pre, params.b));
  return {g, PredictionState{g}};
}

namespace {

Tensor activate(const Tensor& x, Activation act) {
  return act == Activation::Tanh ? tanh(x) : relu(x);
}

}  // namespace

Tensor joint(const Tensor& h, const Tensor& g, const JointParams& params) {
  if (h.rank() != 1 || h.dim(0) != params.w_enc.dim(0)) {
    throw DimensionError("joint: h " + shape_string(h.shape()) +
                         " does not match W " +
                         shape_string(params.w_enc.shape()));
  }
  if (g.rank() != 1 || g.dim(0) != params.w_pred.dim(0)) {
    throw DimensionError("joint: g " + shape_string(g.shape()) +
                         " does not match V " +
                         shape_string(params.w_pred.shape()));
  }
  const Tensor lattice = joint_lattice(reshape(h, {1, h.numel()}),
                                       reshape(g, {1, g.numel()}), params);
  return reshape(lattice, {lattice.dim(1)});
}

Tensor joint_lattice(const Tensor& hidden, const Tensor& predictions,
                     const JointParams& params) {
  const Tensor enc = matmul(hidden, params.w_enc);
  const Tensor pred = matmul(predictions, params.w_pred);
  const Tensor z = activate(add_rowwise(pairwise_sum(enc, pred), params.b),
                            params.activation);
  return log_softmax(matmul(z, params.out), 1);
}

namespace {

Tensor uniform_param(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(double(fan_in));
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from(std::move(shape), std::move(v)).as_parameter();
}

}  // namespace

Transducer Transducer::init(const ModelDims& dims, const WindowConfig& window,
                            std::uint64_t seed) {
  dims.validate();
  window.validate();
  Rng rng(seed);
  Transducer m;
  m.dims_ = dims;
  m.window_ = window;
  std::size_t in = dims.input;
  for (std::size_t l = 0; l < dims.encoder_layers; ++l) {
    EncoderLayer layer;
    layer.w_x = uniform_param({in, dims.hidden}, in, rng);
    layer.w_h = uniform_param({dims.hidden, dims.hidden}, dims.hidden, rng);
    layer.b = uniform_param({dims.hidden}, in, rng);
    m.encoder_.layers.push_back(std::move(layer));
    in = dims.hidden;
  }
  m.prediction_.kind = dims.predictor;
  m.prediction_.embedding =
      uniform_param({dims.vocab, dims.prediction}, dims.vocab, rng);
  if (dims.predictor == PredictorKind::Recurrent) {
    const auto dp = dims.prediction;
    m.prediction_.w_in = uniform_param({dp, dp}, dp, rng);
    m.prediction_.w_rec = uniform_param({dp, dp}, dp, rng);
    m.prediction_.b = uniform_param({dp}, dp, rng);
  }
  m.joint_.activation = dims.activation;
  m.joint_.w_enc = uniform_param({dims.hidden, dims.joint}, dims.hidden, rng);
  m.joint_.w_pred =
      uniform_param({dims.prediction, dims.joint}, dims.prediction, rng);
  m.joint_.b = uniform_param({dims.joint}, dims.hidden, rng);
  m.joint_.out = uniform_param({dims.joint, dims.vocab}, dims.joint, rng);
  m.sparse_ = SparseParams::init(window, dims.hidden, rng);
  return m;
}

void Transducer::set_window(const WindowConfig& window) {
  window.validate();
  if (window.strategy != window_.strategy) {
    throw ConfigError("set_window: cannot change combination strategy");
  }
  if (window.strategy == Strategy::LearnedCoefficients &&
      window.length != window_.length) {
    throw ConfigError("set_window: LC coefficients are tied to window length");
  }
  window_ = window;
}

std::vector<NamedParameter> Transducer::parameters() {
  std::vector<NamedParameter> out;
  for (auto& p : std::as_const(*this).parameters()) {
    out.push_back({p.name, const_cast<Tensor*>(p.tensor)});
  }
  return out;
}

std::vector<NamedConstParameter> Transducer::parameters() const {
  std::vector<NamedConstParameter> out;
  for (std::size_t l = 0; l < encoder_.layers.size(); ++l) {
    const auto prefix = "encoder." + std::to_string(l) + ".";
    out.push_back({prefix + "w_x", &encoder_.layers[l].w_x});
    out.push_back({prefix + "w_h", &encoder_.layers[l].w_h});
    out.push_back({prefix + "b", &encoder_.layers[l].b});
  }
  out.push_back({"prediction.embedding", &prediction_.embedding});
  if (prediction_.kind == PredictorKind::Recurrent) {
    out.push_back({"prediction.w_in", &prediction_.w_in});
    out.push_back({"prediction.w_rec", &prediction_.w_rec});
    out.push_back({"prediction.b", &prediction_.b});
  }
  out.push_back({"joint.w_enc", &joint_.w_enc});
  out.push_back({"joint.w_pred", &joint_.w_pred});
  out.push_back({"joint.b", &joint_.b});
  out.push_back({"joint.out", &joint_.out});
  if (sparse_.lc_weights.defined()) {
    out.push_back({"sparse.lc_weights", &sparse_.lc_weights});
  }
  if (sparse_.sa_proj.defined()) {
    out.push_back({"sparse.sa_proj", &sparse_.sa_proj});
  }
  return out;
}

Tensor Transducer::dense_hidden(const Tensor& features) const {
  return encode(features, encoder_);
}

Tensor Transducer::sparse_hidden(const Tensor& features) const {
  return sparsify(encode(features, encoder_), window_, sparse_);
}

Tensor Transducer::prediction_sequence(const LabelSeq& labels) const {
  std::vector<Tensor> rows;
  rows.reserve(labels.size() + 1);
  auto [g, state] = predict_step(kStart, PredictionState{}, prediction_);
  rows.push_back(g);
  for (Label y : labels) {
    auto next = predict_step(y, state, prediction_);
    rows.push_back(next.first);
    state = std::move(next.second);
  }
  return stack_rows(rows);
}

// ---------------------------------------------------------------------------
// Checkpoint I/O

namespace {

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
bool read_le(std::istream& is, T& value) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  std::memcpy(&value, bytes, sizeof(T));
  return true;
}

}  // namespace

void save_checkpoint(const Transducer& model,
                     const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_le<std::uint32_t>(os, kCheckpointVersion);
  write_le<std::uint32_t>(os, std::uint32_t(model.dims().vocab));
  for (const auto& p : model.parameters()) {
    write_le<std::uint32_t>(os, std::uint32_t(p.name.size()));
    os.write(p.name.data(), std::streamsize(p.name.size()));
    const auto& shape = p.tensor->shape();
    write_le<std::uint32_t>(os, std::uint32_t(shape.size()));
    for (auto d : shape) write_le<std::uint64_t>(os, std::uint64_t(d));
    for (double v : p.tensor->data()) write_le<double>(os, v);
  }
  if (!os) throw IoError("write failed for " + path.string());
}

Transducer load_checkpoint(const std::filesystem::path& path,
                           const ModelDims& dims, const WindowConfig& window) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  if (!is.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw CheckpointError(path.string() + ": not a checkpoint (bad magic)");
  }
  std::uint32_t version = 0, vocab = 0;
  if (!read_le(is, version) || !read_le(is, vocab)) {
    throw CheckpointError(path.string() + ": truncated header");
  }
  if (version != kCheckpointVersion) {
    throw CheckpointError(path.string() + ": unsupported format version " +
                          std::to_string(version));
  }
  if (vocab != dims.vocab) {
    throw CheckpointError(path.string() + ": vocabulary size " +
                          std::to_string(vocab) + " but config expects " +
                          std::to_string(dims.vocab));
  }

  std::map<std::string, Tensor> stored;
  while (true) {
    std::uint32_t name_len = 0;
    if (!read_le(is, name_len)) break;
    if (name_len > 4096) throw CheckpointError(path.string() + ": corrupt entry");
    std::string name(name_len, '\0');
    std::uint32_t rank = 0;
    if (!is.read(name.data(), name_len) || !read_le(is, rank) || rank > 8) {
      throw CheckpointError(path.string() + ": truncated entry");
    }
    Shape shape(rank);
    for (auto& d : shape) {
      std::uint64_t v = 0;
      if (!read_le(is, v) || v > (1u << 24)) {
        throw CheckpointError(path.string() + ": corrupt dims for " + name);
      }
      d = std::size_t(v);
    }
    std::vector<double> values(shape_numel(shape));
    for (auto& v : values) {
      if (!read_le(is, v)) {
        throw CheckpointError(path.string() + ": truncated payload for " + name);
      }
    }
    stored[name] = Tensor::from(std::move(shape), std::move(values));
  }

  // A freshly initialized model supplies the expected names and shapes.
  Transducer model = Transducer::init(dims, window, 0);
  for (auto& p : model.parameters()) {
    auto it = stored.find(p.name);
    if (it == stored.end()) {
      throw CheckpointError(path.string() + ": missing parameter " + p.name);
    }
    if (it->second.shape() != p.tensor->shape()) {
      throw CheckpointError(path.string() + ": parameter " + p.name +
                            " has shape " + shape_string(it->second.shape()) +
                            ", config expects " +
                            shape_string(p.tensor->shape()));
    }
    *p.tensor = it->second.as_parameter();
    stored.erase(it);
  }
  if (!stored.empty()) {
    throw CheckpointError(path.string() + ": unexpected parameter " +
                          stored.begin()->first);
  }
  return model;
}

}  // namespace tst
