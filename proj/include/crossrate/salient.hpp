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

// Reference-point state -> salient-point state (e.g. a corner of the target
// vehicle). Orientation is the heading of the velocity vector.

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

#include <cmath>

#include "crossrate/errors.hpp"
#include "crossrate/gaussian.hpp"
#include "crossrate/vehicle_dynamics.hpp"

namespace crossrate {

/// Translation of the salient point in the target's body frame (x forward).
struct SalientOffset {
  double dx_body = 0.0;  // m
  double dy_body = 0.0;  // m
};

inline constexpr double kMinHeadingSpeed = 1e-3;  // m/s

namespace detail {

template <typename T>
Eigen::Matrix<T, 6, 1> salient_map(const Eigen::Matrix<T, 6, 1>& s,
                                   const SalientOffset& off,
                                   const Eigen::Vector2d& jerk) {
  using std::sqrt;
  const T& vx = s(2);
  const T& vy = s(3);
  const T& ax = s(4);
  const T& ay = s(5);
  const T v2 = vx * vx + vy * vy;
  const T v = sqrt(v2);
  const T c = vx / v;
  const T sn = vy / v;

  // R * offset and R' * offset.
  const T rx = c * off.dx_body - sn * off.dy_body;
  const T ry = sn * off.dx_body + c * off.dy_body;
  const T drx = -ry;
  const T dry = rx;

  const T alpha_dot = (vx * ay - vy * ax) / v2;
  const T alpha_ddot =
      T(2.0) * (vx * vy * (ax * ax - ay * ay) - ax * ay * (vx * vx - vy * vy)) /
          (v2 * v2) +
      (vx * jerk(1) - vy * jerk(0)) / v2;

  Eigen::Matrix<T, 6, 1> out;
  out(0) = s(0) + rx;
  out(1) = s(1) + ry;
  out(2) = vx + alpha_dot * drx;
  out(3) = vy + alpha_dot * dry;
  out(4) = ax - alpha_dot * alpha_dot * rx + alpha_ddot * drx;
  out(5) = ay - alpha_dot * alpha_dot * ry + alpha_ddot * dry;
  return out;
}

inline void check_heading(const StateVector& s) {
  if (!(std::hypot(s.xdot, s.ydot) > kMinHeadingSpeed)) {
    throw DomainError("salient transform: speed too small to define heading");
  }
}

}  // namespace detail

/// Full nonlinear transformation. `jerk` is the deterministic jerk (B u(t))
/// entering the heading acceleration; zero for a constant-acceleration model.
inline StateVector salient_transform_state(
    const StateVector& s, const SalientOffset& off,
    const Eigen::Vector2d& jerk = Eigen::Vector2d::Zero()) {
  detail::check_heading(s);
  return StateVector::from(detail::salient_map<double>(s.vec(), off, jerk));
}

/// d(salient state) / d(reference state), exact via forward-mode AD.
inline Matrix6 salient_jacobian(
    const StateVector& s, const SalientOffset& off,
    const Eigen::Vector2d& jerk = Eigen::Vector2d::Zero()) {
  detail::check_heading(s);
  using Dual = Eigen::AutoDiffScalar<Vector6>;
  Eigen::Matrix<Dual, 6, 1> in;
  const Vector6 v = s.vec();
  for (int i = 0; i < 6; ++i) in(i) = Dual(v(i), 6, i);
  const Eigen::Matrix<Dual, 6, 1> out = detail::salient_map<Dual>(in, off, jerk);
  Matrix6 jac;
  for (int i = 0; i < 6; ++i) jac.row(i) = out(i).derivatives().transpose();
  return jac;
}

/// Linearized density transformation: nonlinear map on the mean, J P J^T on
/// the covariance.
inline GaussianDensity salient_transform_density(
    const GaussianDensity& g, const SalientOffset& off,
    const Eigen::Vector2d& jerk = Eigen::Vector2d::Zero()) {
  if (g.dim() != 6) {
    throw ArgumentError("salient_transform_density: expected 6-dim density");
  }
  const StateVector m = StateVector::from(g.mean());
  const Matrix6 jac = salient_jacobian(m, off, jerk);
  return {salient_transform_state(m, off, jerk).vec(),
          symmetrized(jac * Matrix6(g.cov()) * jac.transpose())};
}

}  // namespace crossrate
