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
#include <span>
#include <string>
#include <vector>

#include "tst/model.hpp"
#include "tst/time_sparse.hpp"

namespace tst {

struct EditStats {
  std::size_t distance = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
};

// Levenshtein alignment of hyp against ref. Insertions are extra hyp symbols,
// deletions are missing ref symbols.
EditStats edit_distance(std::span<const Label> ref, std::span<const Label> hyp);

// Character error rate in percent.
double cer(const std::vector<LabelSeq>& refs, const std::vector<LabelSeq>& hyps);

// Processing time over audio duration.
double rtf(double wall_seconds, std::size_t frames, double frame_shift_ms = 10.0);

struct LatticeCost {
  std::size_t sparse_frames = 0;
  std::size_t cells = 0;
  double reduction = 1.0;  // cells(stride) / cells(stride 1)
};

LatticeCost lattice_cost(std::size_t frames, std::size_t target_len,
                         const WindowConfig& cfg);

struct EvalReport {
  std::string config_id;
  std::size_t window_length = 1;
  std::size_t window_stride = 1;
  std::string strategy;
  std::string decoder;
  std::size_t beam = 1;
  double cer_percent = 0.0;
  double rtf = 0.0;
  std::uint64_t lattice_cells = 0;
  std::uint64_t joint_calls = 0;
  double wall_ms = 0.0;
};

inline constexpr const char* kCsvHeader =
    "config_id,window_length,window_stride,strategy,decoder,beam,cer_percent,"
    "rtf,lattice_cells,joint_calls,wall_ms";

std::string to_csv_row(const EvalReport& report);

}  // namespace tst
