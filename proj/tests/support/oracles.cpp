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

#include "oracles.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace oracle {

double pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double pearson_exact(std::span<const int> x, std::span<const int> y) {
  const long long n = static_cast<long long>(x.size());
  long long sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const long long num = n * sxy - sx * sy;
  const long long dx = n * sxx - sx * sx;
  const long long dy = n * syy - sy * sy;
  return static_cast<double>(static_cast<long double>(num) / std::sqrt(static_cast<long double>(dx) * dy));
}

std::vector<double> midranks(std::span<const double> x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) less += 1;
      if (v == x[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  long long concordant = 0, discordant = 0, tx = 0, ty = 0, n0 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++n0;
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) ++tx;
      if (dy == 0) ++ty;
      if (dx == 0 || dy == 0) continue;
      if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
}

Anova two_way_anova(const Eigen::MatrixXd& m) {
  const double n = static_cast<double>(m.rows()), k = static_cast<double>(m.cols());
  const double grand = m.mean();
  double ssr = 0, ssc = 0, sst = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) ssr += k * std::pow(m.row(i).mean() - grand, 2);
  for (Eigen::Index j = 0; j < m.cols(); ++j) ssc += n * std::pow(m.col(j).mean() - grand, 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) sst += std::pow(m(i, j) - grand, 2);
  }
  const double sse = sst - ssr - ssc;
  Anova a;
  a.msr = ssr / (n - 1);
  a.msc = ssc / (k - 1);
  a.mse = sse / ((n - 1) * (k - 1));
  a.icc2k = (a.msr - a.mse) / (a.msr + (a.msc - a.mse) / n);
  a.icc3k = (a.msr - a.mse) / a.msr;
  return a;
}

std::vector<double> welch_psd(std::span<const double> x, int nfft) {
  if (x.size() < static_cast<std::size_t>(nfft)) throw std::invalid_argument("signal shorter than nfft");
  std::vector<double> window(nfft);
  for (int i = 0; i < nfft; ++i) window[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / nfft);
  double* in = fftw_alloc_real(nfft);
  fftw_complex* out = fftw_alloc_complex(nfft / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(nfft, in, out, FFTW_ESTIMATE);
  std::vector<double> psd(nfft / 2 + 1, 0.0);
  int segments = 0;
  for (std::size_t start = 0; start + nfft <= x.size(); start += nfft / 2) {
    for (int i = 0; i < nfft; ++i) in[i] = x[start + i] * window[i];
    fftw_execute(plan);
    for (int b = 0; b <= nfft / 2; ++b) psd[b] += out[b][0] * out[b][0] + out[b][1] * out[b][1];
    ++segments;
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  for (auto& v : psd) v /= segments;
  return psd;
}

double band_power(const std::vector<double>& psd, int nfft, int fs, double lo_hz, double hi_hz) {
  double sum = 0;
  int count = 0;
  for (std::size_t b = 0; b < psd.size(); ++b) {
    const double f = static_cast<double>(b) * fs / nfft;
    if (f >= lo_hz && f <= hi_hz) {
      sum += psd[b];
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("empty band");
  return sum / count;
}

double peak_frequency(std::span<const double> x, int fs) {
  const int n = static_cast<int>(x.size());
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  std::copy(x.begin(), x.end(), in);
  fftw_execute(plan);
  int best = 0;
  double best_mag = -1;
  for (int b = 0; b <= n / 2; ++b) {
    const double mag = out[b][0] * out[b][0] + out[b][1] * out[b][1];
    if (mag > best_mag) {
      best_mag = mag;
      best = b;
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return static_cast<double>(best) * fs / n;
}

Eigen::MatrixXd varimax_pairwise(const Eigen::MatrixXd& loadings, int sweeps) {
  const Eigen::Index p = loadings.rows(), k = loadings.cols();
  Eigen::VectorXd h = loadings.rowwise().norm();
  Eigen::MatrixXd a = loadings;
  for (Eigen::Index i = 0; i < p; ++i) a.row(i) /= h(i);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double largest = 0;
    for (Eigen::Index c1 = 0; c1 < k; ++c1) {
      for (Eigen::Index c2 = c1 + 1; c2 < k; ++c2) {
        // Kaiser (1958): tan(4 phi) = (D - 2AB/p) / (C - (A^2 - B^2)/p)
        double A = 0, B = 0, C = 0, D = 0;
        for (Eigen::Index i = 0; i < p; ++i) {
          const double x = a(i, c1), y = a(i, c2);
          const double u = x * x - y * y, v = 2 * x * y;
          A += u;
          B += v;
          C += u * u - v * v;
          D += 2 * u * v;
        }
        const double num = D - 2 * A * B / p;
        const double den = C - (A * A - B * B) / p;
        const double phi = std::atan2(num, den) / 4;
        largest = std::max(largest, std::abs(phi));
        const double c = std::cos(phi), s = std::sin(phi);
        for (Eigen::Index i = 0; i < p; ++i) {
          const double x = a(i, c1), y = a(i, c2);
          a(i, c1) = c * x + s * y;
          a(i, c2) = -s * x + c * y;
        }
      }
    }
    if (largest < 1e-15) break;
  }
  for (Eigen::Index i = 0; i < p; ++i) a.row(i) *= h(i);
  return a;
}

double loading_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int k = static_cast<int>(a.cols());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double worst = 0;
    for (int c = 0; c < k; ++c) {
      const double plus = (a.col(c) - b.col(perm[c])).cwiseAbs().maxCoeff();
      const double minus = (a.col(c) + b.col(perm[c])).cwiseAbs().maxCoeff();
      worst = std::max(worst, std::min(plus, minus));
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Eigen::MatrixXd random_correlation(int p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(3 * p, p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = z(gen);
  }
  Eigen::MatrixXd s = x.transpose() * x;
  const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
  return d.asDiagonal() * s * d.asDiagonal();
}

}  // namespace oracle
