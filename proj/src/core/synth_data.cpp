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

#include "tst/synth_data.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "tst/error.hpp"
#include "tst/random.hpp"

namespace tst {

using nlohmann::json;

void TaskSpec::validate() const {
  if (vocab < 2) throw ContractError("task vocab must include >= 1 label");
  if (vocab - 1 > input_dim) {
    throw ContractError("task: " + std::to_string(vocab - 1) +
                        " labels do not fit one-hot prototypes of dimension " +
                        std::to_string(input_dim));
  }
  if (frames_per_label < 1) throw ContractError("task: frames_per_label >= 1");
  if (!(noise >= 0.0)) throw ContractError("task: noise sigma must be >= 0");
  if (min_labels > max_labels) {
    throw ContractError("task: min_labels exceeds max_labels");
  }
  if (max_labels < 1) throw ContractError("task: max_labels must be >= 1");
  if (vocab < 3 && max_labels > 1) {
    throw ContractError("task: consecutive labels must differ, need >= 2 labels");
  }
}

std::vector<double> prototype(Label k, std::size_t input_dim) {
  std::vector<double> v(input_dim, 0.0);
  v.at(std::size_t(k - 1)) = 1.0;
  return v;
}

Dataset generate(const TaskSpec& task, std::uint64_t seed) {
  task.validate();
  Rng rng(seed);
  Dataset data;
  data.reserve(task.count);
  const auto labels_hi = std::int64_t(task.vocab - 1);
  for (std::size_t n = 0; n < task.count; ++n) {
    Utterance utt;
    utt.id = "utt" + std::to_string(n);
    const auto len = std::size_t(rng.integer(std::int64_t(task.min_labels),
                                             std::int64_t(task.max_labels)));
    Label prev = kBlank;
    for (std::size_t i = 0; i < len; ++i) {
      Label k;
      do {
        k = Label(rng.integer(1, labels_hi));
      } while (k == prev);
      utt.labels.push_back(k);
      prev = k;
    }
    // An empty label sequence still gets one frame of silence.
    const std::size_t frames = std::max<std::size_t>(1, len * task.frames_per_label);
    std::vector<double> values;
    values.reserve(frames * task.input_dim);
    for (std::size_t f = 0; f < frames; ++f) {
      std::vector<double> frame = len ? prototype(utt.labels[f / task.frames_per_label],
                                                  task.input_dim)
                                      : std::vector<double>(task.input_dim, 0.0);
      for (double& x : frame) {
        if (task.noise > 0.0) x += rng.normal(0.0, task.noise);
      }
      values.insert(values.end(), frame.begin(), frame.end());
    }
    utt.features = Tensor::matrix(frames, task.input_dim, std::move(values));
    data.push_back(std::move(utt));
  }
  return data;
}

void validate_utterance(const Utterance& utt) {
  if (utt.features.rank() != 2 || utt.features.dim(0) == 0) {
    throw SchemaError(utt.id + ": features must be a non-empty matrix");
  }
  if (utt.features.dim(0) < utt.labels.size()) {
    throw SchemaError(utt.id + ": fewer frames than labels");
  }
  for (Label y : utt.labels) {
    if (y <= kBlank) {
      throw SchemaError(utt.id + ": label " + std::to_string(y) +
                        " is blank or negative");
    }
  }
}

Dataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open dataset " + path.string());
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    Utterance utt;
    try {
      utt.id = obj.at("id").get<std::string>();
      const auto rows = obj.at("features").get<std::vector<std::vector<double>>>();
      utt.labels = obj.at("labels").get<LabelSeq>();
      if (rows.empty()) {
        throw SchemaError("line " + std::to_string(line_no) + ": no feature frames");
      }
      const std::size_t cols = rows.front().size();
      std::vector<double> values;
      values.reserve(rows.size() * cols);
      for (const auto& r : rows) {
        if (r.size() != cols) {
          throw SchemaError("line " + std::to_string(line_no) +
                            ": non-rectangular feature matrix");
        }
        values.insert(values.end(), r.begin(), r.end());
      }
      utt.features = Tensor::matrix(rows.size(), cols, std::move(values));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    try {
      validate_utterance(utt);
    } catch (const SchemaError& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
    data.push_back(std::move(utt));
  }
  return data;
}

void save_jsonl(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& utt : data) {
    validate_utterance(utt);
    json rows = json::array();
    const std::size_t cols = utt.features.dim(1);
    const auto values = utt.features.data();
    for (std::size_t r = 0; r < utt.features.dim(0); ++r) {
      rows.push_back(std::vector<double>(values.begin() + r * cols,
                                         values.begin() + (r + 1) * cols));
    }
    json obj = {{"id", utt.id}, {"features", rows}, {"labels", utt.labels}};
    os << obj.dump() << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace tst
