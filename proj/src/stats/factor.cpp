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

#include "p804/stats/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "p804/error.hpp"
#include "p804/stats/special.hpp"

namespace p804::stats {

namespace {

void check_correlation(const Eigen::MatrixXd& r) {
  require(r.rows() == r.cols() && r.rows() >= 2, "invalid-argument", "correlation matrix must be square, p >= 2");
  require(r.allFinite(), "invalid-argument", "correlation matrix has non-finite entries");
  require((r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-10, "invalid-argument", "correlation matrix is not symmetric");
}

struct Profile {
  double objective = 0.0;
  Eigen::VectorXd gradient;  // with respect to psi
  Eigen::MatrixXd loadings;
};

// The profiled ML problem: for fixed psi the optimal loadings come from the k
// largest eigenpairs of Psi^-1/2 R Psi^-1/2.
Profile profile(const Eigen::MatrixXd& r, const Eigen::VectorXd& psi, int k, bool with_gradient) {
  const Eigen::Index p = r.rows();
  const Eigen::VectorXd inv_sqrt = psi.array().rsqrt();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * r * inv_sqrt.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  require(eig.info() == Eigen::Success, "numerical", "eigen-decomposition failed");
  const Eigen::VectorXd& theta = eig.eigenvalues();  // ascending

  Profile out;
  for (Eigen::Index j = 0; j < p - k; ++j) out.objective += theta(j) - std::log(theta(j));
  out.objective -= static_cast<double>(p - k);

  if (with_gradient) {
    Eigen::MatrixXd top(p, k);
    for (int f = 0; f < k; ++f) {
      const Eigen::Index col = p - 1 - f;
      top.col(f) = eig.eigenvectors().col(col) * std::sqrt(std::max(theta(col) - 1.0, 0.0));
    }
    out.loadings = psi.array().sqrt().matrix().asDiagonal() * top;
    const Eigen::VectorXd fitted = out.loadings.rowwise().squaredNorm() + psi;
    out.gradient = (fitted - r.diagonal()).array() / psi.array().square();
  }
  return out;
}

// Orients each factor so its loadings sum to a non-negative value and orders
// factors by decreasing sum of squared loadings.
Eigen::MatrixXd canonical_columns(const Eigen::MatrixXd& loadings, Eigen::MatrixXd* rotation = nullptr) {
  const Eigen::Index k = loadings.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXd ss = loadings.colwise().squaredNorm();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ss(a) > ss(b); });
  Eigen::MatrixXd out(loadings.rows(), k);
  Eigen::MatrixXd rot;
  if (rotation) rot.resize(rotation->rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    const double sign = loadings.col(src).sum() < 0.0 ? -1.0 : 1.0;
    out.col(c) = sign * loadings.col(src);
    if (rotation) rot.col(c) = sign * rotation->col(src);
  }
  if (rotation) *rotation = rot;
  return out;
}

}  // namespace

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data) {
  require(data.rows() >= 2 && data.cols() >= 1, "invalid-argument", "need at least two observations");
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const Eigen::VectorXd sd = centered.colwise().norm();
  for (Eigen::Index j = 0; j < sd.size(); ++j) {
    require(sd(j) > 0.0, "undefined-correlation", "variable " + std::to_string(j) + " has zero variance");
  }
  const Eigen::MatrixXd z = centered * sd.cwiseInverse().asDiagonal();
  Eigen::MatrixXd r = z.transpose() * z;
  r.diagonal().setOnes();
  return r;
}

KmoResult kmo(const Eigen::MatrixXd& r) {
  check_correlation(r);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
  require(lu.isInvertible(), "singular", "correlation matrix is singular");
  const Eigen::MatrixXd q = lu.inverse();
  const Eigen::Index p = r.rows();

  KmoResult out;
  out.per_variable = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  double r2_total = 0.0, q2_total = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    require(q(i, i) > 0.0, "singular", "correlation matrix is not positive definite");
    double r2 = 0.0, q2 = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i == j) continue;
      const double partial = -q(i, j) / std::sqrt(q(i, i) * q(j, j));
      r2 += r(i, j) * r(i, j);
      q2 += partial * partial;
    }
    if (r2 + q2 > 0.0) out.per_variable(i) = r2 / (r2 + q2);
    r2_total += r2;
    q2_total += q2;
  }
  if (r2_total > 0.0) {
    out.overall = r2_total / (r2_total + q2_total);
  } else {
    out.reason = "no off-diagonal correlation: KMO is 0/0";
  }
  return out;
}

BartlettResult bartlett_sphericity(const Eigen::MatrixXd& r, std::size_t n) {
  check_correlation(r);
  const auto p = static_cast<double>(r.rows());
  require(static_cast<double>(n) >= p + 1.0, "invalid-argument", "Bartlett's test needs n >= p + 1 observations");
  const Eigen::LLT<Eigen::MatrixXd> llt(r);
  require(llt.info() == Eigen::Success, "not-positive-definite", "correlation matrix is not positive definite");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < r.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));

  BartlettResult out;
  // + 0.0 turns a negative zero into +0 for ln|R| == 0.
  out.chi2 = -(static_cast<double>(n) - 1.0 - (2.0 * p + 5.0) / 6.0) * log_det + 0.0;
  out.df = p * (p - 1.0) / 2.0;
  out.p_value = chi_square_sf(out.chi2, out.df);
  return out;
}

Eigen::VectorXd scree(const Eigen::MatrixXd& r) {
  check_correlation(r);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().reverse();
}

int scree_elbow(const Eigen::VectorXd& ev) {
  const auto p = static_cast<int>(ev.size());
  if (p < 3) return 1;
  int best = 1;
  double best_curvature = -std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < p; ++i) {
    const double curvature = ev(i - 1) - 2.0 * ev(i) + ev(i + 1);
    if (curvature > best_curvature) {
      best_curvature = curvature;
      best = i;
    }
  }
  return std::clamp(best, 1, p - 1);
}

double ml_discrepancy(const Eigen::MatrixXd& r, const Eigen::VectorXd& uniquenesses, int n_factors) {
  check_correlation(r);
  require(uniquenesses.size() == r.rows() && (uniquenesses.array() > 0.0).all(), "invalid-argument",
          "uniquenesses must be positive, one per variable");
  return profile(r, uniquenesses, n_factors, false).objective;
}

FactorSolution efa_ml(const Eigen::MatrixXd& r, int n_factors, std::optional<std::size_t> n_observations,
                      const std::vector<std::string>& variable_names, const EfaOptions& options) {
  check_correlation(r);
  const Eigen::Index p = r.rows();
  require(n_factors >= 1 && n_factors < p, "invalid-argument", "number of factors must lie in [1, p-1]");
  require(variable_names.empty() || variable_names.size() == static_cast<std::size_t>(p), "invalid-argument",
          "one name per variable expected");
  const Eigen::LLT<Eigen::MatrixXd> llt(r);
  require(llt.info() == Eigen::Success, "not-positive-definite", "correlation matrix is not positive definite");

  // Optimise z = ln(psi) inside [ln(min_uniqueness), 0] by projected Newton
  // steps. The Hessian comes from central differences of the analytic
  // gradient; p is small, and plain quasi-Newton crawls along the flat
  // valleys that near-Heywood solutions produce.
  const double lower = std::log(options.min_uniqueness);
  const double upper = 0.0;
  auto clamp_z = [&](Eigen::VectorXd z) { return z.cwiseMax(lower).cwiseMin(upper); };

  const Eigen::VectorXd r_inv_diag = llt.solve(Eigen::MatrixXd::Identity(p, p)).diagonal();
  const double start_scale = 1.0 - 0.5 * n_factors / static_cast<double>(p);
  Eigen::VectorXd z = clamp_z((start_scale / r_inv_diag.array()).log().matrix());

  auto evaluate = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& grad) {
    const Eigen::VectorXd psi = zz.array().exp();
    const Profile pr = profile(r, psi, n_factors, true);
    grad = pr.gradient.cwiseProduct(psi);
    return pr.objective;
  };
  auto free_mask = [&](const Eigen::VectorXd& zz, const Eigen::VectorXd& grad) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      if ((zz(i) <= lower && grad(i) > 0.0) || (zz(i) >= upper && grad(i) < 0.0)) mask(i) = 0.0;
    }
    return mask;
  };
  auto newton_direction = [&](const Eigen::VectorXd& zz, const Eigen::VectorXd& grad, const Eigen::VectorXd& mask) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (mask(i) != 0.0) free.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd hf(m, m);
    Eigen::VectorXd g_plus, g_minus;
    for (Eigen::Index a = 0; a < m; ++a) {
      const double h = 1e-5;
      Eigen::VectorXd zp = zz, zm = zz;
      zp(free[a]) += h;
      zm(free[a]) -= h;
      evaluate(zp, g_plus);
      evaluate(zm, g_minus);
      for (Eigen::Index b = 0; b < m; ++b) hf(b, a) = (g_plus(free[b]) - g_minus(free[b])) / (2.0 * h);
    }
    hf = 0.5 * (hf + hf.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hf);
    Eigen::VectorXd lambda = eig.eigenvalues().cwiseAbs();
    const double floor = std::max(1e-8 * lambda.maxCoeff(), 1e-12);
    lambda = lambda.cwiseMax(floor);
    Eigen::VectorXd gf(m);
    for (Eigen::Index a = 0; a < m; ++a) gf(a) = grad(free[a]);
    const Eigen::VectorXd step_free =
        -(eig.eigenvectors() * (eig.eigenvectors().transpose() * gf).cwiseQuotient(lambda));
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(p);
    for (Eigen::Index a = 0; a < m; ++a) dir(free[a]) = step_free(a);
    return dir;
  };

  Eigen::VectorXd grad;
  double f = evaluate(z, grad);

  FactorSolution out;
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::VectorXd mask = free_mask(z, grad);
    if (grad.cwiseProduct(mask).cwiseAbs().maxCoeff() == 0.0) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = newton_direction(z, grad, mask);
    if (!(dir.dot(grad) < 0.0)) dir = -grad.cwiseProduct(mask);

    double step = 1.0;
    Eigen::VectorXd z_new, grad_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      z_new = clamp_z(z + step * dir);
      f_new = evaluate(z_new, grad_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * grad.dot(z_new - z)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = grad.cwiseProduct(mask).cwiseAbs().maxCoeff() < std::sqrt(options.tolerance);
      break;
    }

    const double decrease = f - f_new;
    z = z_new;
    grad = grad_new;
    f = f_new;

    const double projected = grad.cwiseProduct(free_mask(z, grad)).cwiseAbs().maxCoeff();
    if (decrease < options.tolerance && projected < options.gradient_tolerance) {
      out.converged = true;
      break;
    }
  }

  const Eigen::VectorXd psi = z.array().exp();
  const Profile pr = profile(r, psi, n_factors, true);
  out.objective = pr.objective;
  out.loadings = canonical_columns(pr.loadings);
  out.uniquenesses = psi;
  out.communalities = Eigen::VectorXd::Ones(p) - psi;
  out.variance_explained = out.loadings.colwise().squaredNorm().transpose() / static_cast<double>(p);
  out.eigenvalues = scree(r);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (psi(i) <= options.min_uniqueness * (1.0 + 1e-9)) {
      out.heywood.push_back(variable_names.empty() ? "var" + std::to_string(i + 1)
                                                   : variable_names[static_cast<std::size_t>(i)]);
    }
  }
  out.kmo = kmo(r);
  if (n_observations) out.bartlett = bartlett_sphericity(r, *n_observations);
  return out;
}

double varimax_criterion(const Eigen::MatrixXd& loadings, bool kaiser_normalize) {
  Eigen::MatrixXd x = loadings;
  if (kaiser_normalize) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double h = x.row(i).norm();
      if (h > 0.0) x.row(i) /= h;
    }
  }
  const auto p = static_cast<double>(x.rows());
  const Eigen::ArrayXXd sq = x.array().square();
  double total = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean_sq = sq.col(j).sum() / p;
    total += sq.col(j).square().sum() / p - mean_sq * mean_sq;
  }
  return total;
}

VarimaxResult varimax(const Eigen::MatrixXd& loadings, bool kaiser_normalize, double tolerance, int max_iterations) {
  const Eigen::Index p = loadings.rows();
  const Eigen::Index k = loadings.cols();
  VarimaxResult out;
  if (k < 2) {
    out.loadings = loadings;
    out.rotation = Eigen::MatrixXd::Identity(k, k);
    return out;
  }

  Eigen::MatrixXd x = loadings;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
  if (kaiser_normalize) {
    for (Eigen::Index i = 0; i < p; ++i) {
      const double h = x.row(i).norm();
      if (h > 0.0) {
        scale(i) = h;
        x.row(i) /= h;
      }
    }
  }

  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(k, k);
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd z = x * rot;
    const Eigen::RowVectorXd col_ss = z.colwise().squaredNorm();
    const Eigen::MatrixXd target = z.array().cube().matrix() - z * (col_ss / static_cast<double>(p)).asDiagonal();
    const Eigen::MatrixXd b = x.transpose() * target;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd next = svd.matrixU() * svd.matrixV().transpose();
    const double change = (next - rot).cwiseAbs().maxCoeff();
    rot = next;
    if (change < tolerance) break;
  }

  Eigen::MatrixXd rotated = x * rot;
  rotated = scale.asDiagonal() * rotated;
  out.rotation = rot;
  out.loadings = canonical_columns(rotated, &out.rotation);
  return out;
}

}  // namespace p804::stats
