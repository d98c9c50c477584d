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

#include <cstdint>

#include <Eigen/Core>

namespace p804::stats {

enum class IccForm : std::uint8_t {
  AbsoluteAgreement,  // ICC(2,k)
  Consistency,        // ICC(3,k)
};

struct IccResult {
  double value = 0.0;
  double ms_rows = 0.0;     // between subjects
  double ms_columns = 0.0;  // between raters
  double ms_error = 0.0;
  Eigen::Index subjects = 0;
  Eigen::Index raters = 0;
};

/// Average-measures intraclass correlation from a two-way ANOVA of a
/// complete subjects x raters matrix:
///   agreement   (MSR - MSE) / (MSR + (MSC - MSE) / n)
///   consistency (MSR - MSE) / MSR
IccResult icc_k(const Eigen::MatrixXd& ratings, IccForm form = IccForm::AbsoluteAgreement);

inline double icc_2k(const Eigen::MatrixXd& ratings) { return icc_k(ratings).value; }

}  // namespace p804::stats
