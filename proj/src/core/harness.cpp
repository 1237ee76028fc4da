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

#include "tst/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "tst/error.hpp"
#include "tst/ops.hpp"
#include "tst/random.hpp"
#include "tst/transducer_loss.hpp"

namespace tst {

std::string_view to_string(DecoderKind kind) {
  return kind == DecoderKind::Greedy ? "greedy" : "beam";
}

DecoderKind parse_decoder(std::string_view text) {
  if (text == "greedy") return DecoderKind::Greedy;
  if (text == "beam") return DecoderKind::Beam;
  throw ConfigError("unknown decoder '" + std::string(text) +
                    "' (expected greedy or beam)");
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_size(std::string_view key, std::string_view text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + std::string(key) +
                      "': expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ConfigError("key '" + std::string(key) + "': expected a number, got '" +
                      s + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
  bool affects_training;
  bool is_path;
};

template <typename Member>
Field size_field(std::string name, Member member, bool training) {
  return {name,
          [member](const RunConfig& c) { return std::to_string(member(c)); },
          [member, name](RunConfig& c, std::string_view v) {
            member(c) = parse_size(name, v);
          },
          training, false};
}

template <typename Member>
Field double_field(std::string name, Member member, bool training) {
  return {name, [member](const RunConfig& c) { return format_double(member(c)); },
          [member, name](RunConfig& c, std::string_view v) {
            member(c) = parse_double(name, v);
          },
          training, false};
}

template <typename Member>
Field string_field(std::string name, Member member, bool training, bool path) {
  return {name, [member](const RunConfig& c) { return member(c); },
          [member](RunConfig& c, std::string_view v) { member(c) = std::string(v); },
          training, path};
}

#define TST_MEMBER(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(size_field("vocab", TST_MEMBER(dims.vocab), true));
    f.push_back(size_field("input_dim", TST_MEMBER(dims.input), true));
    f.push_back(size_field("hidden_dim", TST_MEMBER(dims.hidden), true));
    f.push_back(size_field("pred_dim", TST_MEMBER(dims.prediction), true));
    f.push_back(size_field("joint_dim", TST_MEMBER(dims.joint), true));
    f.push_back(size_field("encoder_layers", TST_MEMBER(dims.encoder_layers), true));
    f.push_back({"predictor",
                 [](const RunConfig& c) { return std::string(to_string(c.dims.predictor)); },
                 [](RunConfig& c, std::string_view v) { c.dims.predictor = parse_predictor(v); },
                 true, false});
    f.push_back({"activation",
                 [](const RunConfig& c) { return std::string(to_string(c.dims.activation)); },
                 [](RunConfig& c, std::string_view v) { c.dims.activation = parse_activation(v); },
                 true, false});
    f.push_back(size_field("window_length", TST_MEMBER(window.length), true));
    f.push_back(size_field("window_stride", TST_MEMBER(window.stride), true));
    f.push_back({"strategy",
                 [](const RunConfig& c) { return std::string(to_string(c.window.strategy)); },
                 [](RunConfig& c, std::string_view v) { c.window.strategy = parse_strategy(v); },
                 true, false});
    f.push_back({"decoder",
                 [](const RunConfig& c) { return std::string(to_string(c.decoder)); },
                 [](RunConfig& c, std::string_view v) { c.decoder = parse_decoder(v); },
                 false, false});
    f.push_back(size_field("beam", TST_MEMBER(decode.beam), false));
    f.push_back(size_field("max_emissions", TST_MEMBER(decode.max_emissions), false));
    f.push_back(double_field("learning_rate", TST_MEMBER(optimizer.learning_rate), true));
    f.push_back(double_field("momentum", TST_MEMBER(optimizer.momentum), true));
    f.push_back(size_field("steps", TST_MEMBER(optimizer.steps), true));
    f.push_back(size_field("batch_size", TST_MEMBER(optimizer.batch_size), true));
    f.push_back(double_field("clip_norm", TST_MEMBER(optimizer.clip_norm), true));
    f.push_back(size_field("log_every", TST_MEMBER(optimizer.log_every), false));
    f.push_back({"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, std::string_view v) { c.seed = parse_size("seed", v); },
                 true, false});
    f.push_back(size_field("num_utterances", TST_MEMBER(task.count), false));
    f.push_back(size_field("frames_per_label", TST_MEMBER(task.frames_per_label), false));
    f.push_back(double_field("noise", TST_MEMBER(task.noise), false));
    f.push_back(size_field("min_labels", TST_MEMBER(task.min_labels), false));
    f.push_back(size_field("max_labels", TST_MEMBER(task.max_labels), false));
    f.push_back(string_field("dataset", TST_MEMBER(dataset), false, true));
    f.push_back(string_field("eval_dataset", TST_MEMBER(eval_dataset), false, true));
    f.push_back(string_field("checkpoint", TST_MEMBER(checkpoint), false, true));
    f.push_back(string_field("report", TST_MEMBER(report), false, true));
    f.push_back(string_field("cache_dir", TST_MEMBER(cache_dir), false, true));
    f.push_back(string_field("sweep_lengths", TST_MEMBER(sweep_lengths), false, false));
    f.push_back(string_field("sweep_strides", TST_MEMBER(sweep_strides), false, false));
    f.push_back(string_field("sweep_strategies", TST_MEMBER(sweep_strategies), false, false));
    return f;
  }();
  return table;
}

#undef TST_MEMBER

const Field& field(std::string_view key) {
  for (const auto& f : fields())
    if (f.name == key) return f;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

// FNV-1a, 64-bit.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, trim(value));
}

std::string RunConfig::get(std::string_view key) const {
  return field(key).get(*this);
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& f : fields()) n.push_back(f.name);
    return n;
  }();
  return names;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    try {
      set(trim(std::string_view(text).substr(0, eq)),
          std::string_view(text).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
  }
}

void RunConfig::apply_environment() {
  if (const char* s = std::getenv("TST_SEED"); s && *s) set("seed", s);
}

void RunConfig::validate() const {
  dims.validate();
  window.validate();
  decode.validate();
  if (optimizer.learning_rate < 0.0) {
    throw ConfigError("learning_rate must be >= 0");
  }
  if (optimizer.momentum < 0.0 || optimizer.momentum >= 1.0) {
    throw ConfigError("momentum must be in [0, 1)");
  }
  if (optimizer.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (optimizer.clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
}

std::string RunConfig::training_fingerprint() const {
  Fnv1a h;
  for (const auto& f : fields()) {
    if (!f.affects_training) continue;
    h.update(f.name);
    h.update("=");
    h.update(f.get(*this));
    h.update("\n");
  }
  // Dataset contents rather than its path.
  std::ifstream is(dataset, std::ios::binary);
  if (is) {
    std::ostringstream contents;
    contents << is.rdbuf();
    h.update(contents.str());
  } else {
    h.update("missing:" + dataset);
  }
  return h.hex();
}

std::string RunConfig::config_id() const {
  Fnv1a h;
  h.update(training_fingerprint());
  for (const auto* key : {"decoder", "beam", "max_emissions"}) {
    h.update(key);
    h.update(get(key));
  }
  return h.hex();
}

// ---------------------------------------------------------------------------
// Training

double mean_loss(const Transducer& model, const Dataset& data) {
  if (data.empty()) throw EmptyInputError("mean_loss: empty dataset");
  NoGradGuard no_grad;
  double total = 0.0;
  for (const auto& utt : data) {
    total += utterance_loss(model, utt.features, utt.labels).item();
  }
  return total / double(data.size());
}

TrainResult train(const RunConfig& cfg, const Dataset& data, const LogFn& log) {
  cfg.validate();
  if (data.empty()) throw EmptyInputError("train: empty dataset");
  for (const auto& utt : data) {
    validate_utterance(utt);
    if (utt.features.dim(1) != cfg.dims.input) {
      throw DimensionError("train: utterance " + utt.id + " has feature dim " +
                           std::to_string(utt.features.dim(1)) +
                           ", model expects " + std::to_string(cfg.dims.input));
    }
  }

  TrainResult result;
  result.model = Transducer::init(cfg.dims, cfg.window, cfg.seed);
  auto& model = result.model;
  const auto& opt = cfg.optimizer;
  Rng shuffle_rng(cfg.seed ^ 0x5DEECE66DULL);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  auto params = model.parameters();
  std::vector<std::vector<double>> velocity(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i].assign(params[i].tensor->numel(), 0.0);
  }

  result.initial_mean_loss = mean_loss(model, data);
  if (log) log("initial mean loss " + format_double(result.initial_mean_loss));

  for (std::size_t step = 1; step <= opt.steps; ++step) {
    std::vector<std::vector<double>> grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      grad[i].assign(params[i].tensor->numel(), 0.0);
    }
    double batch_loss = 0.0;
    const std::size_t batch = std::min(opt.batch_size, data.size());
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
        cursor = 0;
      }
      const auto& utt = data[order[cursor++]];
      Tensor loss;
      try {
        loss = utterance_loss(model, utt.features, utt.labels);
      } catch (const DomainError& e) {
        // Non-finite parameters surface as domain errors inside the graph.
        throw DivergenceError("training diverged at step " + std::to_string(step) +
                              ": " + e.what());
      }
      batch_loss += loss.item();
      const Gradients g = backward(loss);
      for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor gi = g.of(*params[i].tensor);
        const auto d = gi.data();
        for (std::size_t j = 0; j < d.size(); ++j) grad[i][j] += d[j];
      }
    }
    batch_loss /= double(batch);
    if (!std::isfinite(batch_loss)) {
      throw DivergenceError("training diverged at step " + std::to_string(step) +
                            ": mini-batch loss is " + format_double(batch_loss));
    }
    result.step_losses.push_back(batch_loss);

    double norm_sq = 0.0;
    for (auto& gi : grad)
      for (auto& v : gi) {
        v /= double(batch);
        norm_sq += v * v;
      }
    const double norm = std::sqrt(norm_sq);
    const double clip =
        (opt.clip_norm > 0.0 && norm > opt.clip_norm) ? opt.clip_norm / norm : 1.0;

    for (std::size_t i = 0; i < params.size(); ++i) {
      std::vector<double> values = params[i].tensor->to_vector();
      for (std::size_t j = 0; j < values.size(); ++j) {
        velocity[i][j] = opt.momentum * velocity[i][j] + clip * grad[i][j];
        values[j] -= opt.learning_rate * velocity[i][j];
      }
      *params[i].tensor =
          Tensor::from(params[i].tensor->shape(), std::move(values)).as_parameter();
    }
    if (log && opt.log_every > 0 && step % opt.log_every == 0) {
      log("step " + std::to_string(step) + " loss " + format_double(batch_loss));
    }
  }
  result.final_mean_loss = mean_loss(model, data);
  if (log) log("final mean loss " + format_double(result.final_mean_loss));
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

DecodeResult run_decoder(const Tensor& sparse, const Transducer& model,
                         const RunConfig& cfg) {
  if (cfg.decoder == DecoderKind::Greedy) {
    return greedy_decode(sparse, model, cfg.decode.max_emissions);
  }
  return beam_decode(sparse, model, cfg.decode);
}

void check_compatible(const RunConfig& cfg, const Transducer& model) {
  const auto& a = cfg.dims;
  const auto& b = model.dims();
  if (a.input != b.input || a.hidden != b.hidden || a.prediction != b.prediction ||
      a.joint != b.joint || a.vocab != b.vocab ||
      a.encoder_layers != b.encoder_layers || a.predictor != b.predictor ||
      a.activation != b.activation) {
    throw CheckpointError("model dimensions do not match the run config");
  }
  if (cfg.window.strategy != model.window().strategy) {
    throw CheckpointError("model was trained with strategy " +
                          std::string(to_string(model.window().strategy)));
  }
}

}  // namespace

DecodeResult decode_utterance(const Transducer& model, const RunConfig& cfg,
                              const Tensor& features) {
  check_compatible(cfg, model);
  NoGradGuard no_grad;
  return run_decoder(model.sparse_hidden(features), model, cfg);
}

EvalOutput evaluate(const RunConfig& cfg, const Transducer& model,
                    const Dataset& data) {
  cfg.validate();
  check_compatible(cfg, model);
  if (data.empty()) throw EmptyInputError("evaluate: empty dataset");
  NoGradGuard no_grad;
  using Clock = std::chrono::steady_clock;

  EvalOutput out;
  std::vector<LabelSeq> refs;
  double wall_seconds = 0.0;
  std::size_t frames = 0;
  auto& r = out.report;
  for (const auto& utt : data) {
    if (utt.features.dim(1) != cfg.dims.input) {
      throw DimensionError("evaluate: utterance " + utt.id +
                           " feature dim does not match the model");
    }
    const Tensor sparse = model.sparse_hidden(utt.features);
    const auto start = Clock::now();
    DecodeResult decoded = run_decoder(sparse, model, cfg);
    wall_seconds += std::chrono::duration<double>(Clock::now() - start).count();
    frames += utt.features.dim(0);
    r.joint_calls += decoded.joint_calls;
    r.lattice_cells += sparse.dim(0) * (utt.labels.size() + 1);
    refs.push_back(utt.labels);
    out.hypotheses.push_back(std::move(decoded.labels));
  }
  r.config_id = cfg.config_id();
  r.window_length = model.window().length;
  r.window_stride = model.window().stride;
  r.strategy = std::string(to_string(model.window().strategy));
  r.decoder = std::string(to_string(cfg.decoder));
  r.beam = cfg.decoder == DecoderKind::Greedy ? 1 : cfg.decode.beam;
  r.cer_percent = cer(refs, out.hypotheses);
  // Guard against a zero reading from a coarse clock on tiny inputs.
  wall_seconds = std::max(wall_seconds, 1e-9);
  r.rtf = rtf(wall_seconds, frames);
  r.wall_ms = wall_seconds * 1000.0;
  return out;
}

void append_csv(const std::filesystem::path& path, const EvalReport& report) {
  const bool fresh = !std::filesystem::exists(path) ||
                     std::filesystem::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("cannot open " + path.string() + " for appending");
  if (fresh) os << kCsvHeader << '\n';
  os << to_csv_row(report) << '\n';
  if (!os) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

SweepResult sweep(const RunConfig& cfg, const Dataset& train_data,
                  const Dataset& eval_data, const LogFn& log) {
  cfg.validate();
  auto lengths = split_list(cfg.sweep_lengths);
  auto strides = split_list(cfg.sweep_strides);
  auto strategies = split_list(cfg.sweep_strategies);
  if (lengths.empty()) lengths.push_back(cfg.get("window_length"));
  if (strides.empty()) strides.push_back(cfg.get("window_stride"));
  if (strategies.empty()) strategies.push_back(cfg.get("strategy"));

  std::filesystem::create_directories(cfg.cache_dir);
  SweepResult result;
  for (const auto& strategy : strategies)
    for (const auto& length : lengths)
      for (const auto& stride : strides) {
        RunConfig point = cfg;
        point.set("strategy", strategy);
        point.set("window_length", length);
        point.set("window_stride", stride);
        point.validate();
        const auto key = point.training_fingerprint();
        const auto ckpt = std::filesystem::path(cfg.cache_dir) / (key + ".ckpt");
        Transducer model;
        bool cached = false;
        if (std::filesystem::exists(ckpt)) {
          try {
            model = load_checkpoint(ckpt, point.dims, point.window);
            cached = true;
          } catch (const Error& e) {
            if (log) log(std::string("warning: discarding cached checkpoint: ") + e.what());
          }
        }
        if (cached) {
          ++result.reused;
        } else {
          if (log) {
            log("training " + strategy + " L=" + length + " S=" + stride);
          }
          model = train(point, train_data, log).model;
          const auto tmp = ckpt.string() + ".tmp";
          save_checkpoint(model, tmp);
          std::filesystem::rename(tmp, ckpt);
          ++result.trained;
        }
        auto evaluated = evaluate(point, model, eval_data);
        append_csv(cfg.report, evaluated.report);
        result.reports.push_back(std::move(evaluated.report));
      }
  return result;
}

// ---------------------------------------------------------------------------
// Self checks

double gradient_check(const Transducer& model, const Utterance& utt,
                      double epsilon) {
  const Tensor loss = utterance_loss(model, utt.features, utt.labels);
  const Gradients grads = backward(loss);
  double worst = 0.0;
  Transducer probe = model;
  auto probe_params = probe.parameters();
  for (std::size_t i = 0; i < probe_params.size(); ++i) {
    Tensor& slot = *probe_params[i].tensor;
    const Tensor original = slot;
    const auto analytic = grads.of(original).to_vector();
    std::vector<double> numeric(original.numel());
    for (std::size_t j = 0; j < original.numel(); ++j) {
      auto values = original.to_vector();
      values[j] += epsilon;
      slot = Tensor::from(original.shape(), values);
      double plus, minus;
      {
        NoGradGuard no_grad;
        plus = utterance_loss(probe, utt.features, utt.labels).item();
      }
      values[j] -= 2 * epsilon;
      slot = Tensor::from(original.shape(), values);
      {
        NoGradGuard no_grad;
        minus = utterance_loss(probe, utt.features, utt.labels).item();
      }
      numeric[j] = (plus - minus) / (2 * epsilon);
    }
    slot = original;
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t j = 0; j < numeric.size(); ++j) {
      diff += (analytic[j] - numeric[j]) * (analytic[j] - numeric[j]);
      na += analytic[j] * analytic[j];
      nn += numeric[j] * numeric[j];
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

namespace {

Tensor random_log_probs(std::size_t rows, std::size_t vocab, Rng& rng) {
  std::vector<double> logits(rows * vocab);
  for (auto& v : logits) v = rng.normal(0.0, 1.5);
  NoGradGuard no_grad;
  return log_softmax(Tensor::matrix(rows, vocab, std::move(logits)), 1).detach();
}

LabelSeq random_target(std::size_t len, std::size_t vocab, Rng& rng) {
  LabelSeq y(len);
  for (auto& v : y) v = Label(rng.integer(1, std::int64_t(vocab) - 1));
  return y;
}

Utterance random_utterance(std::size_t frames, std::size_t input_dim,
                           std::size_t labels, std::size_t vocab, Rng& rng) {
  std::vector<double> feats(frames * input_dim);
  for (auto& v : feats) v = rng.normal(0.0, 1.0);
  return {"random", Tensor::matrix(frames, input_dim, std::move(feats)),
          random_target(labels, vocab, rng)};
}

}  // namespace

std::vector<CheckResult> run_self_checks(std::uint64_t seed) {
  std::vector<CheckResult> results;
  Rng rng(seed);
  char buf[160];

  {
    double worst = 0.0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
      const auto T = std::size_t(rng.integer(1, 6));
      const auto U = std::size_t(rng.integer(0, 4));
      const auto V = std::size_t(rng.integer(2, 4));
      const auto y = random_target(U, V, rng);
      const LatticeView lat(random_log_probs(T * (U + 1), V, rng), T, U);
      const double dp = transducer_nll(lat, y).item();
      worst = std::max(worst, std::abs(dp - brute_force_nll(lat, y)));
    }
    std::snprintf(buf, sizeof(buf), "%d random lattices, max |dp - brute| = %.3g",
                  trials, worst);
    results.push_back({"loss-vs-enumeration", worst < 1e-9, buf});
  }

  {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto y = random_target(2, 4, rng);
      const Tensor lp = random_log_probs(3 * 3, 4, rng).as_parameter();
      const Tensor loss = transducer_nll(LatticeView(lp, 3, 2), y);
      const auto analytic = backward(loss).of(lp).to_vector();
      NoGradGuard no_grad;
      for (std::size_t j = 0; j < lp.numel(); ++j) {
        auto v = lp.to_vector();
        v[j] += 1e-6;
        const double plus =
            transducer_nll(LatticeView(Tensor::matrix(9, 4, v), 3, 2), y).item();
        v[j] -= 2e-6;
        const double minus =
            transducer_nll(LatticeView(Tensor::matrix(9, 4, v), 3, 2), y).item();
        const double numeric = (plus - minus) / 2e-6;
        const double denom = std::max({std::abs(numeric), std::abs(analytic[j]), 1e-3});
        worst = std::max(worst, std::abs(numeric - analytic[j]) / denom);
      }
    }
    std::snprintf(buf, sizeof(buf), "3x2 lattices, max rel. error = %.3g", worst);
    results.push_back({"loss-gradient", worst < 1e-4, buf});
  }

  for (auto strategy : {Strategy::AbsoluteAverage, Strategy::LearnedCoefficients,
                        Strategy::SelfAttention}) {
    ModelDims dims;
    dims.input = 4;
    dims.hidden = 5;
    dims.prediction = 3;
    dims.joint = 5;
    dims.vocab = 4;
    const WindowConfig window{4, 2, strategy};
    const auto model = Transducer::init(dims, window, rng.integer(0, 1 << 30));
    const auto utt = random_utterance(12, dims.input, 3, dims.vocab, rng);
    const double err = gradient_check(model, utt);
    std::snprintf(buf, sizeof(buf), "T=12 L=4 S=2, worst rel. error = %.3g", err);
    results.push_back({"pipeline-gradient-" + std::string(to_string(strategy)),
                       err < 1e-4, buf});
  }

  {
    int mismatches = 0;
    for (int i = 0; i < 20; ++i) {
      ModelDims dims;
      dims.input = 3;
      dims.hidden = 4;
      dims.prediction = 3;
      dims.joint = 4;
      dims.vocab = 4;
      const auto model = Transducer::init(dims, WindowConfig{}, rng.integer(0, 1 << 30));
      const auto utt = random_utterance(5, dims.input, 0, dims.vocab, rng);
      NoGradGuard no_grad;
      const Tensor hidden = model.sparse_hidden(utt.features);
      const auto g = greedy_decode(hidden, model, 3);
      const auto b = beam_decode(hidden, model, DecodeConfig{1, 3});
      if (g.labels != b.labels) ++mismatches;
    }
    std::snprintf(buf, sizeof(buf), "20 random models, %d mismatches", mismatches);
    results.push_back({"beam1-equals-greedy", mismatches == 0, buf});
  }
  return results;
}

}  // namespace tst
