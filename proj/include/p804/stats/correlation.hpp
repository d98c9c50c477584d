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

#include <span>
#include <string>
#include <vector>

namespace p804::stats {

/// Sample Pearson coefficient. Throws Error("undefined-correlation") when
/// either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Average (mid) ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> midranks(std::span<const double> x);

/// Pearson coefficient of the mid-ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b with tie correction, O(n log n):
///   (C - D) / sqrt((n0 - n1)(n0 - n2))
/// Throws Error("all-tied") when either input is constant.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct ModelScore {
  std::string model;
  double mos = 0.0;
  double ci95 = 0.0;
};

struct CorrectedRank {
  std::string model;
  double mos = 0.0;
  std::size_t rank = 0;  // 1-based; tied models share a rank
};

/// Ranks models by MOS (descending). Each group is anchored at its highest
/// member; a following model joins the group when its MOS lies inside the
/// anchor's 95% confidence interval, otherwise it opens a new group.
std::vector<CorrectedRank> ci_corrected_ranking(std::vector<ModelScore> scores);

struct TauB95Result {
  double tau = 0.0;
  std::vector<CorrectedRank> ranking_a;
  std::vector<CorrectedRank> ranking_b;
};

/// Kendall tau-b between the CI-corrected rankings of two score sets, over
/// the models present in both.
TauB95Result tau_b95(const std::vector<ModelScore>& a, const std::vector<ModelScore>& b);

}  // namespace p804::stats
