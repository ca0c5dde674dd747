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

// Entry intensity mu+ of the target's (x, y) process through the sides of the
// host rectangle. For each side the density is rotated into the front-side
// frame, where
//
//   mu+ = -p(x0) * J,   J = int_{xdot <= 0} int_{y in I} xdot p(xdot, y | x0)
//
// J is evaluated either by adaptive 2D quadrature or by closed forms that
// factorize the bivariate conditional density to zeroth or first order in
// its off-diagonal element (of the covariance or of its inverse).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string_view>

#include "crossrate/boundary.hpp"
#include "crossrate/errors.hpp"
#include "crossrate/gaussian.hpp"
#include "crossrate/quadrature.hpp"

namespace crossrate {

enum class IntensityMethod { quadrature, taylor0, taylor1_inv, taylor1_cov };

inline constexpr std::array<IntensityMethod, 4> kAllMethods = {
    IntensityMethod::quadrature, IntensityMethod::taylor0,
    IntensityMethod::taylor1_inv, IntensityMethod::taylor1_cov};

inline constexpr std::string_view to_string(IntensityMethod m) {
  switch (m) {
    case IntensityMethod::quadrature: return "quadrature";
    case IntensityMethod::taylor0: return "taylor0";
    case IntensityMethod::taylor1_inv: return "taylor1_inv";
    case IntensityMethod::taylor1_cov: return "taylor1_cov";
  }
  return "?";
}

inline IntensityMethod parse_method(std::string_view s) {
  for (IntensityMethod m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw ArgumentError("unknown intensity method '" + std::string(s) + "'");
}

inline constexpr double kTruncationSigmas = 8.0;
inline constexpr double kQuadratureRelTol = 1e-8;

/// Ingredients of the flux integral in the front-side frame: the density of
/// x at the side, and the conditional density of (xdot, y) there. Index 0 of
/// `mean`/`cov` is xdot, index 1 is y. The side spans y in [lo, hi].
struct FluxParams {
  double p_x0 = 0.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  double lo = 0.0;
  double hi = 0.0;

  double det() const {
    return cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
  }
};

/// Rotates a density over (x, y, xdot, ydot) into `seg`'s frame, takes the
/// (x, xdot, y) marginal and conditions on x = 0.
inline FluxParams flux_params(const GaussianDensity& g4,
                              const BoundarySegment& seg) {
  if (g4.dim() != 4) throw ArgumentError("flux_params: expected 4-dim density");
  const SegmentFrame frame = segment_frame(seg);
  const GaussianDensity local = to_segment_frame(g4, seg);
  const GaussianDensity xvy = marginalize(local, {0, 2, 1});  // x, xdot, y
  const double var_x = xvy.cov()(0, 0);
  if (!(var_x > 0.0)) {
    throw NumericalError("flux_params: marginal variance normal to side is zero");
  }
  const GaussianDensity cond =
      condition(xvy, {0}, Eigen::VectorXd::Zero(1));
  FluxParams p;
  p.p_x0 = normal_pdf(0.0, xvy.mean()(0), std::sqrt(var_x));
  p.mean = cond.mean();
  p.cov = cond.cov();
  p.lo = frame.lo;
  p.hi = frame.hi;
  return p;
}

/// J by adaptive Gauss-Kronrod over y, cut to 8 sigma around the conditional
/// mean. The xdot <= 0 half-line moment given y is exact.
inline double flux_integral_quadrature(const FluxParams& p,
                                       double rel_tol = kQuadratureRelTol) {
  const double s_vv = p.cov(0, 0);
  const double s_yy = p.cov(1, 1);
  const double s_vy = p.cov(0, 1);
  if (!(s_yy > 0.0) || !(s_vv > 0.0)) {
    throw NumericalError("flux_integral_quadrature: degenerate conditional covariance");
  }
  const double sd_y = std::sqrt(s_yy);
  const double slope = s_vy / s_yy;
  const double var_v_given_y = s_vv - s_vy * slope;
  if (!(var_v_given_y > 0.0)) {
    throw NumericalError("flux_integral_quadrature: singular conditional covariance");
  }
  const double sd_v = std::sqrt(var_v_given_y);
  const double y_lo = std::max(p.lo, p.mean(1) - kTruncationSigmas * sd_y);
  const double y_hi = std::min(p.hi, p.mean(1) + kTruncationSigmas * sd_y);
  if (!(y_hi > y_lo)) return 0.0;

  auto integrand = [&](double y) {
    const double m = p.mean(0) + slope * (y - p.mean(1));
    // E[xdot; xdot <= 0] for xdot ~ N(m, sd_v^2)
    const double moment =
        m * normal_cdf(-m / sd_v) - sd_v * sd_v * normal_pdf(0.0, m, sd_v);
    return moment * normal_pdf(y, p.mean(1), sd_y);
  };
  return integrate_adaptive(integrand, y_lo, y_hi, rel_tol, "flux_integral_quadrature")
      .value;
}

/// Zeroth- and first-order parts of a Taylor approximation of J.
struct TaylorTerms {
  double zeroth = 0.0;
  double first = 0.0;
  double total() const { return zeroth + first; }
};

namespace detail {

// int_{-inf}^{0} x N(x; mu, s) dx
inline double half_line_first_moment(double mu, double s) {
  return mu * normal_cdf(-mu / s) - s * s * normal_pdf(0.0, mu, s);
}

inline double interval_mass(double lo, double hi, double mu, double s) {
  return normal_cdf((hi - mu) / s) - normal_cdf((lo - mu) / s);
}

inline void check_flux_det(const FluxParams& p, const char* who) {
  if (!(p.det() > 0.0) || !(p.cov(0, 0) > 0.0) || !(p.cov(1, 1) > 0.0)) {
    throw NumericalError(std::string(who) +
                         ": conditional covariance determinant <= 0");
  }
}

}  // namespace detail

/// Expansion in the off-diagonal element of the inverse covariance. The
/// factor variances are |S| / S_yy (xdot) and |S| / S_xdotxdot (y).
inline TaylorTerms flux_taylor_inverse(const FluxParams& p) {
  detail::check_flux_det(p, "flux_taylor_inverse");
  const double det = p.det();
  const double s1 = std::sqrt(det / p.cov(1, 1));
  const double s2 = std::sqrt(det / p.cov(0, 0));
  const double mu1 = p.mean(0);
  const double mu2 = p.mean(1);
  TaylorTerms t;
  t.zeroth = detail::half_line_first_moment(mu1, s1) *
             detail::interval_mass(p.lo, p.hi, mu2, s2);
  const double inv12 = -p.cov(0, 1) / det;
  // int x1 (x1 - mu1) N1 over x1 <= 0, times int (x2 - mu2) N2 over I.
  const double a1 = s1 * s1 * normal_cdf(-mu1 / s1);
  const double a2 =
      -s2 * s2 * (normal_pdf(p.hi, mu2, s2) - normal_pdf(p.lo, mu2, s2));
  t.first = -inv12 * a1 * a2;
  return t;
}

/// Expansion in the off-diagonal element of the covariance; factors use the
/// marginal variances.
inline TaylorTerms flux_taylor_covariance(const FluxParams& p) {
  detail::check_flux_det(p, "flux_taylor_covariance");
  const double s1 = std::sqrt(p.cov(0, 0));
  const double s2 = std::sqrt(p.cov(1, 1));
  const double mu1 = p.mean(0);
  const double mu2 = p.mean(1);
  TaylorTerms t;
  t.zeroth = detail::half_line_first_moment(mu1, s1) *
             detail::interval_mass(p.lo, p.hi, mu2, s2);
  t.first = p.cov(0, 1) * normal_cdf(-mu1 / s1) *
            -(normal_pdf(p.hi, mu2, s2) - normal_pdf(p.lo, mu2, s2));
  return t;
}

/// Unclamped -p(x0) J for one side and method.
inline double segment_intensity_raw(const GaussianDensity& g4,
                                    const BoundarySegment& seg,
                                    IntensityMethod method) {
  const FluxParams p = flux_params(g4, seg);
  if (p.p_x0 == 0.0) return 0.0;
  double j = 0.0;
  switch (method) {
    case IntensityMethod::quadrature: j = flux_integral_quadrature(p); break;
    case IntensityMethod::taylor0: j = flux_taylor_inverse(p).zeroth; break;
    case IntensityMethod::taylor1_inv: j = flux_taylor_inverse(p).total(); break;
    case IntensityMethod::taylor1_cov: j = flux_taylor_covariance(p).total(); break;
  }
  return -p.p_x0 * j;
}

inline double segment_intensity(const GaussianDensity& g4,
                                const BoundarySegment& seg,
                                IntensityMethod method) {
  return std::max(0.0, segment_intensity_raw(g4, seg, method));
}

inline double segment_intensity_quadrature(const GaussianDensity& g4,
                                           const BoundarySegment& seg) {
  return segment_intensity(g4, seg, IntensityMethod::quadrature);
}
inline double segment_intensity_taylor0(const GaussianDensity& g4,
                                        const BoundarySegment& seg) {
  return segment_intensity(g4, seg, IntensityMethod::taylor0);
}
inline double segment_intensity_taylor1_inv(const GaussianDensity& g4,
                                            const BoundarySegment& seg) {
  return segment_intensity(g4, seg, IntensityMethod::taylor1_inv);
}
inline double segment_intensity_taylor1_cov(const GaussianDensity& g4,
                                            const BoundarySegment& seg) {
  return segment_intensity(g4, seg, IntensityMethod::taylor1_cov);
}

/// Entry intensity at one time, total and per side (s^-1).
struct RateSample {
  double t = 0.0;
  double mu_plus = 0.0;
  std::array<double, 4> per_segment = {0.0, 0.0, 0.0, 0.0};
  IntensityMethod method = IntensityMethod::quadrature;
  int clamped = 0;  // sides whose raw value was negative and set to 0
  double min_raw = 0.0;  // most negative raw side value, 0 if none
};

/// Sums the side intensities of a predicted 6-dim (or 4-dim position and
/// velocity) density at time t.
inline RateSample total_intensity(const GaussianDensity& g, const HostRectangle& rect,
                                  double t, IntensityMethod method) {
  if (g.dim() != 6 && g.dim() != 4) {
    throw ArgumentError("total_intensity: expected 4- or 6-dim density");
  }
  const GaussianDensity g4 = g.dim() == 4 ? g : marginalize(g, {0, 1, 2, 3});
  RateSample s;
  s.t = t;
  s.method = method;
  for (const BoundarySegment& seg : segments(rect)) {
    const double raw = segment_intensity_raw(g4, seg, method);
    if (raw < 0.0) {
      ++s.clamped;
      s.min_raw = std::min(s.min_raw, raw);
    }
    s.per_segment[index_of(seg.id)] = std::max(0.0, raw);
  }
  s.mu_plus = std::accumulate(s.per_segment.begin(), s.per_segment.end(), 0.0);
  return s;
}

}  // namespace crossrate
