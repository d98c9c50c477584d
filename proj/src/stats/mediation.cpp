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

#include "p804/stats/mediation.hpp"

#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "p804/domain.hpp"
#include "p804/error.hpp"

namespace p804::stats {

RegressionFit ols(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& response) {
  const Eigen::Index n = predictors.rows();
  require(response.size() == n, "invalid-argument", "response length differs from predictor rows");
  require(n > predictors.cols() + 1, "invalid-argument", "too few observations for the regression");
  Eigen::MatrixXd design(n, predictors.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(predictors.cols()) = predictors;

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(design);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  RegressionFit fit;
  fit.condition_number = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
  require(fit.condition_number <= kMaxConditionNumber, "collinear",
          "design matrix is collinear (condition number above 1e10)");
  fit.coefficients = design.colPivHouseholderQr().solve(response);
  return fit;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& data) {
  require(data.rows() >= 2, "invalid-argument", "standardization needs at least two rows");
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::MatrixXd out(data.rows(), data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(data.rows() - 1));
    require(sd > 0.0, "collinear", "variable " + std::to_string(j) + " is constant");
    out.col(j) = centered.col(j) / sd;
  }
  return out;
}

MediationResult mediation(const ScoreMatrix& data, const std::vector<std::string>& predictors,
                          const std::string& mediator, const std::string& outcome) {
  require(data.values.rows() >= 10, "invalid-argument", "mediation needs at least 10 observations");
  require(!predictors.empty(), "invalid-argument", "mediation needs at least one predictor");

  std::vector<Eigen::Index> cols;
  for (const auto& p : predictors) cols.push_back(data.column(p));
  const Eigen::Index m_col = data.column(mediator);
  const Eigen::Index y_col = data.column(outcome);

  const auto k = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd raw(data.values.rows(), k + 2);
  for (Eigen::Index j = 0; j < k; ++j) raw.col(j) = data.values.col(cols[static_cast<std::size_t>(j)]);
  raw.col(k) = data.values.col(m_col);
  raw.col(k + 1) = data.values.col(y_col);
  const Eigen::MatrixXd z = standardize(raw);

  const Eigen::MatrixXd x = z.leftCols(k);
  const Eigen::VectorXd m = z.col(k);
  const Eigen::VectorXd y = z.col(k + 1);
  Eigen::MatrixXd xm(x.rows(), k + 1);
  xm << x, m;

  const auto total_fit = ols(x, y);
  const auto a_fit = ols(x, m);
  const auto full_fit = ols(xm, y);
  const double b = full_fit.coefficients(k + 1);

  MediationResult out;
  out.mediator = mediator;
  out.outcome = outcome;
  out.observations = static_cast<std::size_t>(data.values.rows());
  for (Eigen::Index j = 0; j < k; ++j) {
    MediationEffect e;
    e.predictor = predictors[static_cast<std::size_t>(j)];
    e.total = total_fit.coefficients(j + 1);
    e.a = a_fit.coefficients(j + 1);
    e.b = b;
    e.direct = full_fit.coefficients(j + 1);
    e.indirect = e.a * e.b;
    require(std::isfinite(e.total) && std::isfinite(e.direct) && std::isfinite(e.indirect), "numerical",
            "non-finite mediation effect");
    out.effects.push_back(e);
  }
  return out;
}

MediationResult mediation(const ScoreMatrix& data) {
  std::vector<std::string> dims;
  for (auto s : kDimensionScales) dims.emplace_back(to_string(s));
  return mediation(data, dims, std::string(to_string(ScaleId::Signal)), std::string(to_string(ScaleId::Overall)));
}

}  // namespace p804::stats
