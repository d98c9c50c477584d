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

#include "p804/stats/agreement.hpp"

#include "p804/error.hpp"

namespace p804::stats {

IccResult icc_k(const Eigen::MatrixXd& ratings, IccForm form) {
  const Eigen::Index n = ratings.rows();
  const Eigen::Index k = ratings.cols();
  require(n >= 2 && k >= 2, "invalid-argument", "ICC needs at least two subjects and two raters");
  require(ratings.allFinite(), "invalid-argument", "ICC needs a complete matrix");

  const double grand = ratings.mean();
  const Eigen::VectorXd row_means = ratings.rowwise().mean();
  const double ss_rows = static_cast<double>(k) * (row_means.array() - grand).square().sum();

  // Rater and residual sums of squares from pairwise rater differences:
  //   SSC = n/k * sum_{j<l} mean(x_j - x_l)^2
  //   SSE = 1/k * sum_{j<l} sum_i (d_i - mean(d))^2,  d = x_j - x_l
  // Identical raters give exactly zero for both.
  double ss_cols = 0.0;
  double ss_error = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index l = j + 1; l < k; ++l) {
      const Eigen::VectorXd d = ratings.col(j) - ratings.col(l);
      const double mean_d = d.mean();
      ss_cols += mean_d * mean_d;
      ss_error += (d.array() - mean_d).square().sum();
    }
  }
  ss_cols *= static_cast<double>(n) / static_cast<double>(k);
  ss_error /= static_cast<double>(k);

  IccResult r;
  r.subjects = n;
  r.raters = k;
  r.ms_rows = ss_rows / static_cast<double>(n - 1);
  r.ms_columns = ss_cols / static_cast<double>(k - 1);
  r.ms_error = ss_error / static_cast<double>((n - 1) * (k - 1));
  require(r.ms_rows > 0.0, "degenerate", "ICC undefined: no between-subject variance");

  const double denom = form == IccForm::AbsoluteAgreement
                           ? r.ms_rows + (r.ms_columns - r.ms_error) / static_cast<double>(n)
                           : r.ms_rows;
  require(denom > 0.0, "degenerate", "ICC undefined: non-positive denominator");
  r.value = (r.ms_rows - r.ms_error) / denom;
  return r;
}

}  // namespace p804::stats
