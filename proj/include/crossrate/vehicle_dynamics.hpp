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

// White-noise-jerk target model in host-relative coordinates with an
// optional sinusoidal jerk input, its discrete-time process noise, the radar
// measurement model and the steady-state filter covariance.
//
// State ordering throughout: (x, y, xdot, ydot, xddot, yddot).

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "crossrate/errors.hpp"
#include "crossrate/gaussian.hpp"

namespace crossrate {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix36 = Eigen::Matrix<double, 3, 6>;

struct StateVector {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double xdot = 0.0;   // m/s
  double ydot = 0.0;   // m/s
  double xddot = 0.0;  // m/s^2
  double yddot = 0.0;  // m/s^2

  Vector6 vec() const {
    Vector6 v;
    v << x, y, xdot, ydot, xddot, yddot;
    return v;
  }
  static StateVector from(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() != 6) throw ArgumentError("StateVector: expected 6 entries");
    return {v(0), v(1), v(2), v(3), v(4), v(5)};
  }
  bool finite() const { return vec().allFinite(); }
};

/// Jerk PSDs (m^2 s^-5) and sinusoidal jerk input u(t) = (b1, b2) sin(omega t).
struct MotionModel {
  double qx = 0.0;
  double qy = 0.0;
  double b1 = 0.0;      // m s^-3
  double b2 = 0.0;      // m s^-3
  double omega = 0.5;   // s^-1
  bool input_enabled = false;

  void validate() const {
    if (!(qx >= 0.0) || !(qy >= 0.0)) {
      throw ArgumentError("MotionModel: PSDs must be >= 0");
    }
    if (input_enabled && !(omega > 0.0)) {
      throw ArgumentError("MotionModel: omega must be > 0 when input is on");
    }
  }
};

/// Radar (range, azimuth, range-rate) noise and filter cycle time.
struct RadarNoise {
  double sigma_r = 0.5;        // m
  double sigma_phi = 0.00873;  // rad (0.5 deg)
  double sigma_rdot = 0.25;    // m/s
  double cycle_time = 0.05;    // s

  void validate() const {
    if (!(sigma_r > 0.0) || !(sigma_phi > 0.0) || !(sigma_rdot > 0.0) ||
        !(cycle_time > 0.0)) {
      throw ArgumentError("RadarNoise: all fields must be > 0");
    }
  }
  Eigen::Matrix3d covariance() const {
    return Eigen::Vector3d(sigma_r * sigma_r, sigma_phi * sigma_phi,
                           sigma_rdot * sigma_rdot)
        .asDiagonal();
  }
};

inline void check_dt(double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw ArgumentError("time step must be finite and >= 0");
  }
}

/// exp(F dt) for the double-integrator chain; F^3 = 0 so the series is exact.
inline Matrix6 transition_matrix(double dt) {
  check_dt(dt);
  Matrix6 phi = Matrix6::Identity();
  for (int axis = 0; axis < 2; ++axis) {
    phi(axis, axis + 2) = dt;
    phi(axis, axis + 4) = 0.5 * dt * dt;
    phi(axis + 2, axis + 4) = dt;
  }
  return phi;
}

/// Discrete-time process noise covariance of the white-noise jerk model.
inline Matrix6 process_noise_cov(double dt, const MotionModel& model) {
  check_dt(dt);
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  const double dt4 = dt3 * dt;
  const double dt5 = dt4 * dt;
  Eigen::Matrix3d block;
  block << dt5 / 20.0, dt4 / 8.0, dt3 / 6.0,  //
      dt4 / 8.0, dt3 / 3.0, dt2 / 2.0,        //
      dt3 / 6.0, dt2 / 2.0, dt;
  Matrix6 q = Matrix6::Zero();
  const double psd[2] = {model.qx, model.qy};
  for (int axis = 0; axis < 2; ++axis) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        q(axis + 2 * r, axis + 2 * c) = psd[axis] * block(r, c);
      }
    }
  }
  return q;
}

/// Deterministic jerk input B u(t) at absolute time t (zero when disabled).
inline Eigen::Vector2d jerk_input(double t, const MotionModel& model) {
  if (!model.input_enabled) return Eigen::Vector2d::Zero();
  const double s = std::sin(model.omega * t);
  return {model.b1 * s, model.b2 * s};
}

/// Forced response over [t0, t0 + dt] of the sinusoidal jerk input starting
/// from a zero state. Closed-form integrals of (t0 + dt - tau)^k / k! sin(w tau).
inline Vector6 input_response(double t0, double dt, const MotionModel& model) {
  check_dt(dt);
  Vector6 out = Vector6::Zero();
  if (!model.input_enabled || dt == 0.0) return out;
  const double w = model.omega;
  const double c0 = std::cos(w * t0);
  const double s0 = std::sin(w * t0);
  const double c1 = std::cos(w * (t0 + dt));
  const double s1 = std::sin(w * (t0 + dt));
  const double i0 = (c0 - c1) / w;
  const double i1 = dt * c0 / w - (s1 - s0) / (w * w);
  const double i2 =
      0.5 * dt * dt * c0 / w + dt * s0 / (w * w) - (c0 - c1) / (w * w * w);
  const double gain[2] = {model.b1, model.b2};
  for (int axis = 0; axis < 2; ++axis) {
    out(axis) = gain[axis] * i2;
    out(axis + 2) = gain[axis] * i1;
    out(axis + 4) = gain[axis] * i0;
  }
  return out;
}

/// Mean propagation from absolute time t0 to t0 + dt.
inline StateVector predict_mean(const StateVector& s, double dt,
                                const MotionModel& model, double t0 = 0.0) {
  return StateVector::from(transition_matrix(dt) * s.vec() +
                           input_response(t0, dt, model));
}

/// Propagates a 6-dim density: mean via predict_mean, covariance
/// Phi P Phi^T + Q, re-symmetrized.
inline GaussianDensity predict_density(const GaussianDensity& g, double dt,
                                       const MotionModel& model,
                                       double t0 = 0.0) {
  if (g.dim() != 6) throw ArgumentError("predict_density: expected 6-dim density");
  const Matrix6 phi = transition_matrix(dt);
  const Vector6 mean = phi * Vector6(g.mean()) + input_response(t0, dt, model);
  const Matrix6 cov =
      symmetrized(phi * Matrix6(g.cov()) * phi.transpose() +
                  process_noise_cov(dt, model));
  return {mean, cov};
}

struct RadarMeasurement {
  double r = 0.0;     // m
  double phi = 0.0;   // rad
  double rdot = 0.0;  // m/s
};

inline RadarMeasurement measurement_function(const StateVector& s) {
  const double r = std::hypot(s.x, s.y);
  if (!(r > 0.0)) throw DomainError("measurement_function: zero range");
  return {r, std::atan2(s.y, s.x), (s.x * s.xdot + s.y * s.ydot) / r};
}

inline Matrix36 measurement_jacobian(const StateVector& s) {
  const double r2 = s.x * s.x + s.y * s.y;
  const double r = std::sqrt(r2);
  if (!(r > 0.0)) throw DomainError("measurement_jacobian: zero range");
  const double rdot = (s.x * s.xdot + s.y * s.ydot) / r;
  Matrix36 h = Matrix36::Zero();
  h(0, 0) = s.x / r;
  h(0, 1) = s.y / r;
  h(1, 0) = -s.y / r2;
  h(1, 1) = s.x / r2;
  h(2, 0) = s.xdot / r - rdot * s.x / r2;
  h(2, 1) = s.ydot / r - rdot * s.y / r2;
  h(2, 2) = s.x / r;
  h(2, 3) = s.y / r;
  return h;
}

/// One predict/update cycle of the covariance recursion (Joseph form).
inline Matrix6 riccati_step(const Matrix6& posterior, const Matrix6& phi,
                            const Matrix6& q, const Matrix36& h,
                            const Eigen::Matrix3d& r) {
  const Matrix6 prior = symmetrized(phi * posterior * phi.transpose() + q);
  const Eigen::Matrix3d innovation = symmetrized(h * prior * h.transpose() + r);
  const Eigen::Matrix<double, 6, 3> gain =
      innovation.ldlt().solve(h * prior).transpose();
  const Matrix6 ikh = Matrix6::Identity() - gain * h;
  return symmetrized(ikh * prior * ikh.transpose() +
                     gain * r * gain.transpose());
}

struct RiccatiOptions {
  int max_iterations = 10000;
  double tolerance = 1e-9;  // max abs element change between iterations
};

/// Posterior steady-state covariance of a filter running the model at the
/// radar cycle time, with H linearized once at `mean`.
inline Matrix6 steady_state_covariance(const StateVector& mean,
                                       const MotionModel& model,
                                       const RadarNoise& noise,
                                       RiccatiOptions opts = {}) {
  model.validate();
  noise.validate();
  const Matrix6 phi = transition_matrix(noise.cycle_time);
  const Matrix6 q = process_noise_cov(noise.cycle_time, model);
  const Matrix36 h = measurement_jacobian(mean);
  const Eigen::Matrix3d r = noise.covariance();
  Matrix6 p = Matrix6::Identity();
  double change = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Matrix6 next = riccati_step(p, phi, q, h, r);
    if (!next.allFinite()) break;
    change = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (change < opts.tolerance) return p;
  }
  std::ostringstream os;
  os << "steady_state_covariance: no convergence within "
     << opts.max_iterations << " iterations (last change " << change << ")";
  throw ConvergenceError(os.str());
}

}  // namespace crossrate
