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

#include "tst/decode.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <functional>

#include "tst/error.hpp"
#include "tst/ops.hpp"

namespace tst {

void DecodeConfig::validate() const {
  if (beam < 1) throw ConfigError("beam width must be >= 1");
  if (max_emissions < 1) throw ConfigError("max_emissions must be >= 1");
}

namespace {

// Joint network with the encoder and prediction projections cached. Produces
// the same values as joint() for the same (h, g).
class JointScorer {
 public:
  JointScorer(const Tensor& sparse_hidden, const Transducer& model)
      : model_(model),
        enc_proj_(matmul(sparse_hidden, model.joint_params().w_enc)) {
    // A stateless predictor's output depends on the last label only, so its
    // projection can be tabulated once per label.
    if (model.prediction().kind == PredictorKind::Stateless) {
      label_proj_ =
          matmul(model.prediction().embedding, model.joint_params().w_pred);
    }
  }

  std::size_t frames() const { return enc_proj_.dim(0); }
  std::size_t calls() const { return calls_; }

  Hypothesis start() const { return advance({}, kStart); }

  // Hypothesis extended by `label` (or the start hypothesis for kStart).
  Hypothesis advance(const Hypothesis& from, Label label) const {
    Hypothesis h;
    h.labels = from.labels;
    if (label != kStart) h.labels.push_back(label);
    h.log_score = from.log_score;
    if (label_proj_.defined()) {
      if (label == kBlank) {
        throw ContractError("decode: blank never feeds the prediction network");
      }
      h.pred_proj = row(label_proj_, label == kStart ? 0 : std::size_t(label));
      return h;
    }
    auto [g, state] = predict_step(label, from.state, model_.prediction());
    h.state = std::move(state);
    const auto& w_pred = model_.joint_params().w_pred;
    h.pred_proj = reshape(matmul(reshape(g, {1, g.numel()}), w_pred),
                          {w_pred.dim(1)});
    return h;
  }

  std::vector<double> log_probs(std::size_t frame, const Hypothesis& hyp) {
    ++calls_;
    const auto& jp = model_.joint_params();
    Tensor z = add(add(row(enc_proj_, frame), hyp.pred_proj), jp.b);
    z = jp.activation == Activation::Tanh ? tanh(z) : relu(z);
    const Tensor logits = matmul(reshape(z, {1, z.numel()}), jp.out);
    return log_softmax(logits, 1).to_vector();
  }

 private:
  const Transducer& model_;
  Tensor enc_proj_;
  Tensor label_proj_;  // [V x d_j], stateless predictor only
  std::size_t calls_ = 0;
};

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_hidden(const Tensor& sparse_hidden) {
  if (sparse_hidden.rank() != 2) {
    throw DimensionError("decode: expected [T' x d_h], got " +
                         shape_string(sparse_hidden.shape()));
  }
  if (sparse_hidden.dim(0) == 0) throw EmptyInputError("decode: zero frames");
}

// Insertion-ordered set of hypotheses keyed by label sequence; merging adds
// probabilities.
class HypSet {
 public:
  struct Entry {
    Hypothesis hyp;
    std::size_t order;
  };

  void merge(Hypothesis hyp, std::size_t order) {
    auto it = index_.find(hyp.labels);
    if (it != index_.end()) {
      auto& e = entries_[it->second];
      e.hyp.log_score = log_add(e.hyp.log_score, hyp.log_score);
      return;
    }
    index_.emplace(hyp.labels, entries_.size());
    entries_.push_back({std::move(hyp), order});
  }

  std::vector<Entry>& entries() { return entries_; }
  bool empty() const { return entries_.empty(); }

  void keep_if(const std::function<bool(const Entry&)>& pred) {
    std::vector<Entry> kept;
    for (auto& e : entries_)
      if (pred(e)) kept.push_back(std::move(e));
    entries_ = std::move(kept);
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i)
      index_.emplace(entries_[i].hyp.labels, i);
  }

 private:
  std::vector<Entry> entries_;
  std::map<LabelSeq, std::size_t> index_;
};

bool ranks_before(const HypSet::Entry& a, const HypSet::Entry& b) {
  if (a.hyp.log_score != b.hyp.log_score) return a.hyp.log_score > b.hyp.log_score;
  return a.order < b.order;
}

// Keeps the `beam` best entries across both sets.
void prune_jointly(HypSet& finished, HypSet& active, std::size_t beam) {
  std::vector<const HypSet::Entry*> all;
  for (auto& e : finished.entries()) all.push_back(&e);
  for (auto& e : active.entries()) all.push_back(&e);
  if (all.size() <= beam) return;
  std::stable_sort(all.begin(), all.end(),
                   [](const auto* a, const auto* b) { return ranks_before(*a, *b); });
  // Orders are unique within a frame, so (score, order) identifies the cutoff.
  const double cutoff_score = all[beam - 1]->hyp.log_score;
  const std::size_t cutoff_order = all[beam - 1]->order;
  auto keep = [&](const HypSet::Entry& e) {
    if (e.hyp.log_score != cutoff_score) return e.hyp.log_score > cutoff_score;
    return e.order <= cutoff_order;
  };
  finished.keep_if(keep);
  active.keep_if(keep);
}

}  // namespace

DecodeResult greedy_decode(const Tensor& sparse_hidden, const Transducer& model,
                           std::size_t max_emissions) {
  check_hidden(sparse_hidden);
  if (max_emissions < 1) throw ConfigError("max_emissions must be >= 1");
  NoGradGuard no_grad;
  JointScorer scorer(sparse_hidden, model);
  Hypothesis hyp = scorer.start();
  for (std::size_t t = 0; t < scorer.frames(); ++t) {
    for (std::size_t emitted = 0;; ++emitted) {
      const auto lp = scorer.log_probs(t, hyp);
      if (emitted == max_emissions) {
        hyp.log_score += lp[kBlank];
        break;
      }
      // max_element returns the first maximum: lowest index wins ties.
      const auto best = std::size_t(std::max_element(lp.begin(), lp.end()) -
                                    lp.begin());
      if (best == kBlank) {
        hyp.log_score += lp[kBlank];
        break;
      }
      Hypothesis next = scorer.advance(hyp, Label(best));
      next.log_score += lp[best];
      hyp = std::move(next);
    }
  }
  return {hyp.labels, hyp.log_score, scorer.calls()};
}

DecodeResult beam_decode(const Tensor& sparse_hidden, const Transducer& model,
                         const DecodeConfig& cfg) {
  check_hidden(sparse_hidden);
  cfg.validate();
  NoGradGuard no_grad;
  JointScorer scorer(sparse_hidden, model);
  const std::size_t vocab = model.dims().vocab;

  std::vector<Hypothesis> beam{scorer.start()};
  for (std::size_t t = 0; t < scorer.frames(); ++t) {
    HypSet finished;  // hypotheses that emitted blank on this frame
    HypSet active;
    std::size_t order = 0;
    for (auto& h : beam) active.merge(std::move(h), order++);

    for (std::size_t step = 0; !active.empty(); ++step) {
      HypSet expanded;
      for (auto& entry : active.entries()) {
        const Hypothesis& h = entry.hyp;
        const auto lp = scorer.log_probs(t, h);
        Hypothesis done = h;
        done.log_score += lp[kBlank];
        finished.merge(std::move(done), order++);
        if (step == cfg.max_emissions) continue;
        for (std::size_t k = 1; k < vocab; ++k) {
          Hypothesis next = scorer.advance(h, Label(k));
          next.log_score = h.log_score + lp[k];
          expanded.merge(std::move(next), order++);
        }
      }
      active = std::move(expanded);
      prune_jointly(finished, active, cfg.beam);
    }

    auto& entries = finished.entries();
    std::stable_sort(entries.begin(), entries.end(), ranks_before);
    if (entries.size() > cfg.beam) entries.resize(cfg.beam);
    beam.clear();
    for (auto& e : entries) beam.push_back(std::move(e.hyp));
  }
  const Hypothesis& best = beam.front();
  return {best.labels, best.log_score, scorer.calls()};
}

}  // namespace tst
