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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "p804/domain.hpp"
#include "p804/quality_control.hpp"

namespace p804::stats {

struct LabeledRun {
  std::string label;
  std::vector<AcceptedVote> votes;
};

struct PairCorrelation {
  std::size_t run_a = 0;
  std::size_t run_b = 0;
  double pearson = 0.0;
  std::size_t shared_keys = 0;
};

struct ReproducibilityReport {
  MosLevel level = MosLevel::Clip;
  std::vector<std::string> labels;
  /// Per scale: runs x runs Pearson matrix with a unit diagonal.
  std::map<ScaleId, Eigen::MatrixXd> matrices;
  std::map<ScaleId, std::vector<PairCorrelation>> pairs;
};

/// MOS per run at the requested level, then Pearson correlation between every
/// pair of runs over their shared keys, per scale. Throws
/// Error("insufficient-overlap") when a pair shares fewer than two keys.
ReproducibilityReport reproducibility_report(const std::vector<LabeledRun>& runs, MosLevel level);

/// One block per scale laid out as a runs x runs table.
void write_reproducibility_report(const ReproducibilityReport& report, std::ostream& out);

}  // namespace p804::stats
