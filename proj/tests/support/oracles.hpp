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


// Independent reference implementations used by the unit and acceptance
// tests. Nothing here shares code with the library.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

// Correlations, O(n^2) and straight from the definitions.
double pearson(std::span<const double> x, std::span<const double> y);
/// Integer inputs: exact integer sums, one rounding at the end.
double pearson_exact(std::span<const int> x, std::span<const int> y);
std::vector<double> midranks(std::span<const double> x);
double spearman(std::span<const double> x, std::span<const double> y);
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct Anova {
  double msr = 0.0;  // rows (subjects)
  double msc = 0.0;  // columns (raters)
  double mse = 0.0;
  double icc2k = 0.0;
  double icc3k = 0.0;
};

/// Two-way ANOVA table from grand/row/column means.
Anova two_way_anova(const Eigen::MatrixXd& m);

/// Welch PSD (Hann, 50% overlap) via FFTW. Returns power per bin for bins
/// 0..nfft/2; bin width fs/nfft.
std::vector<double> welch_psd(std::span<const double> x, int nfft);

/// Mean PSD over [lo, hi] Hz.
double band_power(const std::vector<double>& psd, int nfft, int fs, double lo_hz, double hi_hz);

/// Frequency of the strongest DFT bin.
double peak_frequency(std::span<const double> x, int fs);

/// Varimax by Kaiser's pairwise planar rotations (row-normalized), iterated
/// to convergence.
Eigen::MatrixXd varimax_pairwise(const Eigen::MatrixXd& loadings, int sweeps = 200);

/// Max absolute entry difference after matching columns up to sign and
/// permutation (exhaustive over permutations).
double loading_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Random symmetric positive-definite correlation matrix.
Eigen::MatrixXd random_correlation(int p, std::uint64_t seed);

}  // namespace oracle
