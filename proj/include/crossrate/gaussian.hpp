// Copyright 2026 The crossrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense small-dimension Gaussian algebra: marginalization, conditioning and
// the scalar normal pdf/cdf used by the analytic intensity formulas.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "crossrate/errors.hpp"

namespace crossrate {

/// Returns (m + m^T) / 2.
template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return typename Derived::PlainObject(0.5 * (m + m.transpose()));
}

/// Mean vector and covariance matrix of a multivariate normal density.
///
/// Construction checks that the covariance is square, matches the mean,
/// is symmetric to 1e-12 relative and positive semi-definite (smallest
/// eigenvalue >= -1e-10 * trace).
class GaussianDensity {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;
  static constexpr double kPsdTolerance = 1e-10;

  GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd cov)
      : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() == 0) {
      throw ArgumentError("GaussianDensity: dimension must be positive");
    }
    if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size()) {
      throw ArgumentError("GaussianDensity: mean/covariance size mismatch");
    }
    if (!mean_.allFinite() || !cov_.allFinite()) {
      throw NumericalError("GaussianDensity: non-finite entries");
    }
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() >
        kSymmetryTolerance * scale) {
      throw NumericalError("GaussianDensity: covariance is not symmetric");
    }
    const double trace = cov_.trace();
    if (trace > 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          cov_, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -kPsdTolerance * trace) {
        std::ostringstream os;
        os << "GaussianDensity: covariance is not PSD (min eigenvalue "
           << es.eigenvalues().minCoeff() << ")";
        throw NumericalError(os.str());
      }
    } else if (trace < 0.0 || cov_.cwiseAbs().maxCoeff() > 0.0) {
      throw NumericalError("GaussianDensity: covariance is not PSD");
    }
  }

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

namespace detail {

inline void check_indices(std::span<const int> idx, Eigen::Index dim,
                          const char* who) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= dim) {
      throw ArgumentError(std::string(who) + ": index " +
                          std::to_string(idx[i]) + " out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (idx[i] == idx[j]) {
        throw ArgumentError(std::string(who) + ": duplicate index " +
                            std::to_string(idx[i]));
      }
    }
  }
}

}  // namespace detail

/// Density of the sub-vector selected by `keep`, in the order given.
inline GaussianDensity marginalize(const GaussianDensity& g,
                                   std::span<const int> keep) {
  detail::check_indices(keep, g.dim(), "marginalize");
  if (keep.empty()) throw ArgumentError("marginalize: empty index set");
  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd mean(n);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mean(i) = g.mean()(keep[i]);
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = g.cov()(keep[i], keep[j]);
  }
  return {std::move(mean), std::move(cov)};
}

inline GaussianDensity marginalize(const GaussianDensity& g,
                                   std::initializer_list<int> keep) {
  return marginalize(g, std::span<const int>(keep.begin(), keep.size()));
}

/// Density of the remaining coordinates given that the coordinates in
/// `given` take `values`. Remaining coordinates keep their original order.
///
/// Throws NumericalError when the conditioning block has a condition number
/// above 1e12 (no regularization is attempted).
inline GaussianDensity condition(const GaussianDensity& g,
                                 std::span<const int> given,
                                 const Eigen::VectorXd& values) {
  detail::check_indices(given, g.dim(), "condition");
  if (static_cast<Eigen::Index>(given.size()) != values.size()) {
    throw ArgumentError("condition: values size does not match index set");
  }
  if (static_cast<Eigen::Index>(given.size()) >= g.dim() || given.empty()) {
    throw ArgumentError("condition: must leave at least one coordinate");
  }
  std::vector<int> rest;
  for (int i = 0; i < g.dim(); ++i) {
    if (std::find(given.begin(), given.end(), i) == given.end()) {
      rest.push_back(i);
    }
  }
  const auto r = static_cast<Eigen::Index>(rest.size());
  const auto m = static_cast<Eigen::Index>(given.size());
  Eigen::MatrixXd s_rr(r, r), s_rm(r, m), s_mm(m, m);
  Eigen::VectorXd mu_r(r), mu_m(m);
  for (Eigen::Index i = 0; i < r; ++i) {
    mu_r(i) = g.mean()(rest[i]);
    for (Eigen::Index j = 0; j < r; ++j) s_rr(i, j) = g.cov()(rest[i], rest[j]);
    for (Eigen::Index j = 0; j < m; ++j) s_rm(i, j) = g.cov()(rest[i], given[j]);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    mu_m(i) = g.mean()(given[i]);
    for (Eigen::Index j = 0; j < m; ++j) s_mm(i, j) = g.cov()(given[i], given[j]);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s_mm,
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    std::ostringstream os;
    os << "condition: conditioning block is singular (eigenvalues in [" << lo
       << ", " << hi << "])";
    throw NumericalError(os.str());
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(s_mm);
  Eigen::VectorXd mean = mu_r + s_rm * ldlt.solve(values - mu_m);
  Eigen::MatrixXd cov = symmetrized(s_rr - s_rm * ldlt.solve(s_rm.transpose()));
  return {std::move(mean), std::move(cov)};
}

inline GaussianDensity condition(const GaussianDensity& g,
                                 std::initializer_list<int> given,
                                 const Eigen::VectorXd& values) {
  return condition(g, std::span<const int>(given.begin(), given.size()),
                   values);
}

/// Standard normal cdf via Phi(z) = erfc(-z / sqrt 2) / 2; exact 0/1 for |z| > 8.
inline double normal_cdf(double z) {
  if (z > 8.0) return 1.0;
  if (z < -8.0) return 0.0;
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

/// N(x; mean, sigma) for a scalar normal with standard deviation sigma > 0.
inline double normal_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Multivariate pdf; requires a positive definite covariance.
inline double density_at(const GaussianDensity& g, const Eigen::VectorXd& x) {
  const Eigen::LLT<Eigen::MatrixXd> llt(g.cov());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("density_at: covariance is not positive definite");
  }
  const Eigen::VectorXd z =
      llt.matrixL().solve(x - g.mean());
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double k = static_cast<double>(g.dim());
  return std::exp(-0.5 * z.squaredNorm() - 0.5 * log_det -
                  0.5 * k * std::log(2.0 * std::numbers::pi));
}

}  // namespace crossrate
