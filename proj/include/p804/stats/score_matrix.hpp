// Copyright 2026 The p804kit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "p804/domain.hpp"
#include "p804/quality_control.hpp"

namespace p804::stats {

/// Subjects (clips or models) x variables (scales or runs).
struct ScoreMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Eigen::MatrixXd values;
  std::size_t dropped_rows = 0;  // keys removed during alignment

  /// Throws Error("invalid-argument") for an unknown label.
  Eigen::Index column(const std::string& label) const;
};

/// Pivots a MOS table into keys x scales, keeping only keys that have every
/// requested scale.
ScoreMatrix pivot_scores(const std::vector<MosEntry>& entries,
                         const std::vector<ScaleId>& scales = {kAllScales.begin(), kAllScales.end()});

void write_score_matrix(const ScoreMatrix& m, std::ostream& out);
/// First column holds row labels; the header names the variables.
ScoreMatrix read_score_matrix(std::istream& in);

}  // namespace p804::stats
