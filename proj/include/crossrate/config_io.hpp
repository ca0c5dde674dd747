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

// JSON scenario configuration. All quantities are SI (m, s, rad). Unknown
// keys are rejected; errors carry a JSON-pointer style path to the field.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "crossrate/errors.hpp"
#include "crossrate/scenario.hpp"

namespace crossrate {

using Json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown(const Json& obj, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(path + "/" + key, "unknown field");
  }
}

inline double get_number(const Json& obj, const std::string& path, const char* key,
                         double current) {
  if (!obj.contains(key)) return current;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path + "/" + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path + "/" + key, "must be finite");
  return d;
}

inline bool get_bool(const Json& obj, const std::string& path, const char* key,
                     bool current) {
  if (!obj.contains(key)) return current;
  const Json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(path + "/" + key, "expected a boolean");
  return v.get<bool>();
}

}  // namespace detail

struct ParsedConfig {
  ScenarioConfig config;
  bool seed_given = false;
};

/// Parses a scenario object, or the "config" member of a run manifest.
/// A "preset" key selects the base scenario that the other keys override.
inline ParsedConfig parse_config(const Json& root) {
  if (root.is_object() && root.contains("config") && root.contains("command")) {
    return parse_config(root.at("config"));
  }
  using detail::get_bool;
  using detail::get_number;
  detail::reject_unknown(root, "",
                         {"preset", "initial_mean", "initial_cov", "model", "radar", "rect",
                          "horizon", "sim_step", "bin_width", "n_traj", "seed",
                          "terminate_on_entry", "salient"});
  ParsedConfig out;
  ScenarioConfig& c = out.config;
  if (root.contains("preset")) {
    if (!root.at("preset").is_string()) throw ConfigError("/preset", "expected a string");
    c = preset(root.at("preset").get<std::string>());
  }
  if (root.contains("initial_mean")) {
    const Json& m = root.at("initial_mean");
    if (!m.is_array() || m.size() != 6) {
      throw ConfigError("/initial_mean", "expected an array of 6 numbers");
    }
    Vector6 v;
    for (int i = 0; i < 6; ++i) {
      if (!m[i].is_number()) {
        throw ConfigError("/initial_mean/" + std::to_string(i), "expected a number");
      }
      v(i) = m[i].get<double>();
    }
    c.initial_mean = StateVector::from(v);
  }
  if (root.contains("initial_cov")) {
    const Json& ic = root.at("initial_cov");
    detail::reject_unknown(ic, "/initial_cov", {"kind", "riccati_q", "matrix"});
    if (ic.contains("kind")) {
      const Json& k = ic.at("kind");
      if (k == "riccati") {
        c.initial_cov.kind = InitialCovariance::Kind::riccati;
      } else if (k == "explicit") {
        c.initial_cov.kind = InitialCovariance::Kind::explicit_matrix;
      } else {
        throw ConfigError("/initial_cov/kind", "expected \"riccati\" or \"explicit\"");
      }
    }
    if (ic.contains("riccati_q")) {
      if (ic.at("riccati_q").is_null()) {
        c.initial_cov.riccati_q.reset();
      } else {
        c.initial_cov.riccati_q = get_number(ic, "/initial_cov", "riccati_q", 0.0);
      }
    }
    if (ic.contains("matrix")) {
      const Json& m = ic.at("matrix");
      if (!m.is_array() || m.size() != 6) {
        throw ConfigError("/initial_cov/matrix", "expected 6 rows");
      }
      for (int r = 0; r < 6; ++r) {
        if (!m[r].is_array() || m[r].size() != 6) {
          throw ConfigError("/initial_cov/matrix/" + std::to_string(r), "expected 6 numbers");
        }
        for (int col = 0; col < 6; ++col) {
          if (!m[r][col].is_number()) {
            throw ConfigError("/initial_cov/matrix/" + std::to_string(r) + "/" +
                                  std::to_string(col),
                              "expected a number");
          }
          c.initial_cov.matrix(r, col) = m[r][col].get<double>();
        }
      }
    }
    if (c.initial_cov.kind == InitialCovariance::Kind::explicit_matrix) {
      const Matrix6& m = c.initial_cov.matrix;
      if ((m - m.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw ConfigError("/initial_cov/matrix", "must be symmetric");
      }
    }
  }
  if (root.contains("model")) {
    const Json& m = root.at("model");
    detail::reject_unknown(m, "/model", {"qx", "qy", "b1", "b2", "omega", "input_enabled"});
    c.model.qx = get_number(m, "/model", "qx", c.model.qx);
    c.model.qy = get_number(m, "/model", "qy", c.model.qy);
    c.model.b1 = get_number(m, "/model", "b1", c.model.b1);
    c.model.b2 = get_number(m, "/model", "b2", c.model.b2);
    c.model.omega = get_number(m, "/model", "omega", c.model.omega);
    c.model.input_enabled = get_bool(m, "/model", "input_enabled", c.model.input_enabled);
    if (c.model.qx < 0.0) throw ConfigError("/model/qx", "must be >= 0");
    if (c.model.qy < 0.0) throw ConfigError("/model/qy", "must be >= 0");
  }
  if (root.contains("radar")) {
    const Json& r = root.at("radar");
    detail::reject_unknown(r, "/radar", {"sigma_r", "sigma_phi", "sigma_rdot", "cycle_time"});
    c.radar.sigma_r = get_number(r, "/radar", "sigma_r", c.radar.sigma_r);
    c.radar.sigma_phi = get_number(r, "/radar", "sigma_phi", c.radar.sigma_phi);
    c.radar.sigma_rdot = get_number(r, "/radar", "sigma_rdot", c.radar.sigma_rdot);
    c.radar.cycle_time = get_number(r, "/radar", "cycle_time", c.radar.cycle_time);
  }
  if (root.contains("rect")) {
    const Json& r = root.at("rect");
    detail::reject_unknown(r, "/rect", {"x_front", "x_rear", "y_left", "y_right"});
    c.rect.x_front = get_number(r, "/rect", "x_front", c.rect.x_front);
    c.rect.x_rear = get_number(r, "/rect", "x_rear", c.rect.x_rear);
    c.rect.y_left = get_number(r, "/rect", "y_left", c.rect.y_left);
    c.rect.y_right = get_number(r, "/rect", "y_right", c.rect.y_right);
  }
  c.horizon = get_number(root, "", "horizon", c.horizon);
  c.sim_step = get_number(root, "", "sim_step", c.sim_step);
  c.bin_width = get_number(root, "", "bin_width", c.bin_width);
  if (root.contains("n_traj")) {
    const Json& n = root.at("n_traj");
    if (!n.is_number_integer()) throw ConfigError("/n_traj", "expected an integer");
    if (n.is_number_unsigned()) {
      c.n_traj = static_cast<std::int64_t>(n.get<std::uint64_t>());
    } else {
      c.n_traj = n.get<std::int64_t>();
    }
    if (c.n_traj < 1) throw ConfigError("/n_traj", "must be >= 1");
  }
  if (root.contains("seed")) {
    const Json& s = root.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0)) {
      throw ConfigError("/seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
    out.seed_given = true;
  }
  c.terminate_on_entry = get_bool(root, "", "terminate_on_entry", c.terminate_on_entry);
  if (root.contains("salient")) {
    const Json& s = root.at("salient");
    if (s.is_null()) {
      c.salient.reset();
    } else {
      detail::reject_unknown(s, "/salient", {"dx_body", "dy_body"});
      SalientOffset off;
      off.dx_body = get_number(s, "/salient", "dx_body", 0.0);
      off.dy_body = get_number(s, "/salient", "dy_body", 0.0);
      c.salient = off;
    }
  }
  c.validate();
  return out;
}

inline ParsedConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Fully materialized configuration (no preset reference).
inline Json to_json(const ScenarioConfig& c) {
  Json j;
  const Vector6 m = c.initial_mean.vec();
  j["initial_mean"] = Json::array();
  for (int i = 0; i < 6; ++i) j["initial_mean"].push_back(m(i));
  Json ic;
  if (c.initial_cov.kind == InitialCovariance::Kind::riccati) {
    ic["kind"] = "riccati";
    ic["riccati_q"] = c.initial_cov.riccati_q ? Json(*c.initial_cov.riccati_q) : Json(nullptr);
  } else {
    ic["kind"] = "explicit";
    ic["matrix"] = Json::array();
    for (int r = 0; r < 6; ++r) {
      Json row = Json::array();
      for (int col = 0; col < 6; ++col) row.push_back(c.initial_cov.matrix(r, col));
      ic["matrix"].push_back(row);
    }
  }
  j["initial_cov"] = ic;
  j["model"] = {{"qx", c.model.qx},       {"qy", c.model.qy},
                {"b1", c.model.b1},       {"b2", c.model.b2},
                {"omega", c.model.omega}, {"input_enabled", c.model.input_enabled}};
  j["radar"] = {{"sigma_r", c.radar.sigma_r},
                {"sigma_phi", c.radar.sigma_phi},
                {"sigma_rdot", c.radar.sigma_rdot},
                {"cycle_time", c.radar.cycle_time}};
  j["rect"] = {{"x_front", c.rect.x_front},
               {"x_rear", c.rect.x_rear},
               {"y_left", c.rect.y_left},
               {"y_right", c.rect.y_right}};
  j["horizon"] = c.horizon;
  j["sim_step"] = c.sim_step;
  j["bin_width"] = c.bin_width;
  j["n_traj"] = c.n_traj;
  j["seed"] = c.seed;
  j["terminate_on_entry"] = c.terminate_on_entry;
  if (c.salient) {
    j["salient"] = {{"dx_body", c.salient->dx_body}, {"dy_body", c.salient->dy_body}};
  } else {
    j["salient"] = nullptr;
  }
  return j;
}

}  // namespace crossrate
