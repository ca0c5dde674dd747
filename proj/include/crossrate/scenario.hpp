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

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "crossrate/boundary.hpp"
#include "crossrate/entry_intensity.hpp"
#include "crossrate/errors.hpp"
#include "crossrate/gaussian.hpp"
#include "crossrate/salient.hpp"
#include "crossrate/vehicle_dynamics.hpp"

namespace crossrate {

/// Initial covariance: steady-state filter covariance at the initial mean,
/// or an explicit matrix. `riccati_q` overrides the jerk PSD used inside the
/// filter recursion (defaults to the prediction model's PSDs).
struct InitialCovariance {
  enum class Kind { riccati, explicit_matrix };
  Kind kind = Kind::riccati;
  Matrix6 matrix = Matrix6::Zero();
  std::optional<double> riccati_q;
};

struct ScenarioConfig {
  StateVector initial_mean;
  InitialCovariance initial_cov;
  MotionModel model;
  RadarNoise radar;
  HostRectangle rect;
  double horizon = 8.0;     // s
  double sim_step = 0.01;   // s
  double bin_width = 0.05;  // s
  std::int64_t n_traj = 100000;
  std::uint64_t seed = 1;
  bool terminate_on_entry = false;
  std::optional<SalientOffset> salient;  // track a body-frame point instead

  void validate() const {
    if (!initial_mean.finite()) throw ConfigError("/initial_mean", "must be finite");
    try {
      model.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError("/model", e.what());
    }
    try {
      radar.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError("/radar", e.what());
    }
    try {
      rect.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError("/rect", e.what());
    }
    if (!(horizon > 0.0)) throw ConfigError("/horizon", "must be > 0");
    if (!(sim_step > 0.0)) throw ConfigError("/sim_step", "must be > 0");
    if (!(bin_width > 0.0)) throw ConfigError("/bin_width", "must be > 0");
    if (!(sim_step <= bin_width)) throw ConfigError("/sim_step", "must be <= bin_width");
    if (n_traj < 1) throw ConfigError("/n_traj", "must be >= 1");
    if (initial_cov.riccati_q && !(*initial_cov.riccati_q >= 0.0)) {
      throw ConfigError("/initial_cov/riccati_q", "must be >= 0");
    }
  }
};

/// Covariance of the initial density.
inline Matrix6 resolve_initial_cov(const ScenarioConfig& c) {
  if (c.initial_cov.kind == InitialCovariance::Kind::explicit_matrix) {
    return c.initial_cov.matrix;
  }
  MotionModel filter_model = c.model;
  if (c.initial_cov.riccati_q) {
    filter_model.qx = filter_model.qy = *c.initial_cov.riccati_q;
  }
  return steady_state_covariance(c.initial_mean, filter_model, c.radar);
}

inline GaussianDensity initial_density(const ScenarioConfig& c) {
  return {c.initial_mean.vec(), resolve_initial_cov(c)};
}

/// Predicts the initial density of a scenario to arbitrary times.
class ScenarioPredictor {
 public:
  explicit ScenarioPredictor(const ScenarioConfig& c)
      : config_(c), initial_(initial_density(c)) {}

  GaussianDensity at(double t) const {
    return predict_density(initial_, t, config_.model, 0.0);
  }

  /// Density of a salient point at time t (linearized transform).
  GaussianDensity salient_at(double t, const SalientOffset& off) const {
    return salient_transform_density(at(t), off, jerk_input(t, config_.model));
  }

  RateSample intensity(double t, IntensityMethod method) const {
    if (config_.salient) {
      return total_intensity(salient_at(t, *config_.salient), config_.rect, t,
                             method);
    }
    return total_intensity(at(t), config_.rect, t, method);
  }

  const ScenarioConfig& config() const { return config_; }
  const GaussianDensity& initial() const { return initial_; }

 private:
  ScenarioConfig config_;
  GaussianDensity initial_;
};

/// Built-in reproduction scenarios: "front" and "front-right".
inline ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  c.model.qx = c.model.qy = 0.0101;
  c.model.omega = 0.5;
  c.model.input_enabled = true;
  if (name == "front") {
    c.initial_mean = {10.0, 0.0, -2.0, 0.4, -0.2, 0.0};
    c.model.b1 = -0.2;
    c.model.b2 = -0.3;
  } else if (name == "front-right") {
    c.initial_mean = {10.0, 10.0, -2.0, -1.6, -0.001, -0.01};
    c.model.b1 = -0.4;
    c.model.b2 = -0.5;
  } else {
    throw ConfigError("/preset", "unknown preset '" + std::string(name) + "'");
  }
  return c;
}

}  // namespace crossrate
