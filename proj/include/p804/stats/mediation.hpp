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

#include "p804/stats/score_matrix.hpp"

namespace p804::stats {

struct MediationEffect {
  std::string predictor;
  double total = 0.0;
  double direct = 0.0;
  double indirect = 0.0;
  double a = 0.0;  // predictor -> mediator
  double b = 0.0;  // mediator -> outcome, controlling for predictors
};

struct MediationResult {
  std::string mediator;
  std::string outcome;
  std::size_t observations = 0;
  std::vector<MediationEffect> effects;
};

struct RegressionFit {
  Eigen::VectorXd coefficients;  // intercept first
  double condition_number = 0.0;
};

inline constexpr double kMaxConditionNumber = 1e10;

/// Ordinary least squares with an intercept. Throws Error("collinear") when
/// the design's condition number exceeds kMaxConditionNumber.
RegressionFit ols(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& response);

/// Column-wise z-scores (sample standard deviation).
Eigen::MatrixXd standardize(const Eigen::MatrixXd& data);

/// All predictors enter every model simultaneously, on standardized data:
///   total    coefficient of x in  outcome  ~ predictors
///   a        coefficient of x in  mediator ~ predictors
///   b, direct                  in  outcome  ~ predictors + mediator
///   indirect a * b
MediationResult mediation(const ScoreMatrix& data, const std::vector<std::string>& predictors,
                          const std::string& mediator, const std::string& outcome);

/// Dimensions as predictors, Signal as mediator, Overall as outcome.
MediationResult mediation(const ScoreMatrix& data);

}  // namespace p804::stats
