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

#include "tst/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "tst/error.hpp"

namespace tst {

EditStats edit_distance(std::span<const Label> ref, std::span<const Label> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  // cost[i][j] aligns ref[0..i) with hyp[0..j); ties prefer substitution,
  // then deletion, then insertion when tracing back.
  std::vector<std::vector<std::size_t>> cost(n + 1,
                                             std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]);
      cost[i][j] = std::min({sub, cost[i - 1][j] + 1, cost[i][j - 1] + 1});
    }

  EditStats stats;
  stats.distance = cost[n][m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        cost[i][j] == cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])) {
      if (ref[i - 1] != hyp[j - 1]) ++stats.substitutions;
      --i;
      --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++stats.deletions;
      --i;
    } else {
      ++stats.insertions;
      --j;
    }
  }
  return stats;
}

double cer(const std::vector<LabelSeq>& refs, const std::vector<LabelSeq>& hyps) {
  if (refs.size() != hyps.size()) {
    throw ContractError("cer: " + std::to_string(refs.size()) +
                        " references but " + std::to_string(hyps.size()) +
                        " hypotheses");
  }
  std::size_t errors = 0, total = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    errors += edit_distance(refs[i], hyps[i]).distance;
    total += refs[i].size();
  }
  if (total == 0) throw ContractError("cer: total reference length is zero");
  return 100.0 * double(errors) / double(total);
}

double rtf(double wall_seconds, std::size_t frames, double frame_shift_ms) {
  if (!(wall_seconds > 0.0)) {
    throw ContractError("rtf: wall time must be positive");
  }
  if (frames < 1) throw ContractError("rtf: frames must be >= 1");
  if (!(frame_shift_ms > 0.0)) {
    throw ContractError("rtf: frame shift must be positive");
  }
  return wall_seconds / (double(frames) * frame_shift_ms / 1000.0);
}

LatticeCost lattice_cost(std::size_t frames, std::size_t target_len,
                         const WindowConfig& cfg) {
  if (frames < 1) throw EmptyInputError("lattice_cost: zero frames");
  cfg.validate();
  LatticeCost c;
  c.sparse_frames = sparse_length(frames, cfg.stride);
  c.cells = c.sparse_frames * (target_len + 1);
  c.reduction = double(c.cells) / double(frames * (target_len + 1));
  return c;
}

std::string to_csv_row(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%s,%s,%zu,%.6f,%.6g,%llu,%llu,%.3f",
                r.config_id.c_str(), r.window_length, r.window_stride,
                r.strategy.c_str(), r.decoder.c_str(), r.beam, r.cer_percent,
                r.rtf, static_cast<unsigned long long>(r.lattice_cells),
                static_cast<unsigned long long>(r.joint_calls), r.wall_ms);
  return buf;
}

}  // namespace tst
