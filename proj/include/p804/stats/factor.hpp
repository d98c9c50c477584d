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

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace p804::stats {

/// Pearson correlation matrix of the columns of `data` (observations x variables).
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data);

struct KmoResult {
  std::optional<double> overall;  // nullopt when no variable pair is correlated
  std::string reason;             // why `overall` is undefined
  Eigen::VectorXd per_variable;   // measure of sampling adequacy, NaN where undefined
};

/// Kaiser-Meyer-Olkin sampling adequacy:
///   sum r_ij^2 / (sum r_ij^2 + sum q_ij^2), i != j,
/// with q the anti-image partial correlations from R^-1.
/// Throws Error("singular") when R cannot be inverted.
KmoResult kmo(const Eigen::MatrixXd& r);

struct BartlettResult {
  double chi2 = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Bartlett's test of sphericity for a p x p correlation matrix estimated from
/// n observations. Throws Error("not-positive-definite").
BartlettResult bartlett_sphericity(const Eigen::MatrixXd& r, std::size_t n);

/// Eigenvalues of R, descending.
Eigen::VectorXd scree(const Eigen::MatrixXd& r);

/// Factor count at the scree elbow (largest second difference), in [1, p-1].
int scree_elbow(const Eigen::VectorXd& eigenvalues);

struct EfaOptions {
  double min_uniqueness = 0.005;
  double tolerance = 1e-8;           // stop when the objective decreases by less
  double gradient_tolerance = 1e-7;  // ... and the projected gradient is below this
  int max_iterations = 500;
};

struct FactorSolution {
  Eigen::MatrixXd loadings;          // p x k
  Eigen::VectorXd uniquenesses;      // p
  Eigen::VectorXd communalities;     // p, 1 - uniqueness
  Eigen::VectorXd variance_explained;  // per factor, fraction of p
  Eigen::VectorXd eigenvalues;       // scree of R
  double objective = 0.0;            // ML discrepancy at the solution
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> heywood;  // variables clamped at min_uniqueness
  std::optional<KmoResult> kmo;
  std::optional<BartlettResult> bartlett;
};

/// Maximum-likelihood factor extraction (unrotated). Uniquenesses minimise
///   F(psi) = ln|Sigma| + tr(R Sigma^-1) - ln|R| - p,  Sigma = L L' + Psi,
/// with L profiled out through the eigen-decomposition of
/// Psi^-1/2 R Psi^-1/2. `n_observations` enables the Bartlett test.
FactorSolution efa_ml(const Eigen::MatrixXd& r, int n_factors, std::optional<std::size_t> n_observations = std::nullopt,
                      const std::vector<std::string>& variable_names = {}, const EfaOptions& options = {});

/// ML discrepancy for a given uniqueness vector (profiled over loadings).
double ml_discrepancy(const Eigen::MatrixXd& r, const Eigen::VectorXd& uniquenesses, int n_factors);

struct VarimaxResult {
  Eigen::MatrixXd loadings;
  Eigen::MatrixXd rotation;  // k x k orthonormal; loadings = input * rotation
  int iterations = 0;
};

/// Kaiser-normalised varimax rotation. A single factor is returned unchanged.
/// Iterates until no rotation entry changes by more than `tolerance`.
VarimaxResult varimax(const Eigen::MatrixXd& loadings, bool kaiser_normalize = true, double tolerance = 1e-10,
                      int max_iterations = 1000);

/// sum over factors of the variance of squared (optionally row-normalised) loadings.
double varimax_criterion(const Eigen::MatrixXd& loadings, bool kaiser_normalize = true);

}  // namespace p804::stats
