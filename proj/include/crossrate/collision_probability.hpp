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

// From intensity curves to collision-probability upper bounds: temporal
// integration, deterministic TTC seeds, adaptive sampling of the intensity
// and the instantaneous spatial-overlap probability used as a comparator.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "crossrate/boundary.hpp"
#include "crossrate/entry_intensity.hpp"
#include "crossrate/errors.hpp"
#include "crossrate/gaussian.hpp"
#include "crossrate/quadrature.hpp"
#include "crossrate/vehicle_dynamics.hpp"

namespace crossrate {

struct RateCurve {
  std::vector<RateSample> samples;  // strictly increasing t
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Upper bound E{N+} on the probability of at least one entry in [t1, t2].
/// Not capped at 1; see capped().
struct ProbabilityBound {
  double t1 = 0.0;
  double t2 = 0.0;
  double p_upper = 0.0;
  int evaluations_used = 0;

  double capped() const { return std::min(p_upper, 1.0); }
};

/// What integrate_intensity does with parts of [t1, t2] outside the samples.
enum class OutsideSamples {
  reject,  // throw ArgumentError
  zero,    // count as zero intensity (adaptive curves stop below the floor)
};

/// Trapezoidal integral of mu+ over [t1, t2] on the curve's (possibly
/// non-uniform) grid, interpolating linearly at the interval ends.
/// t1 == t2 gives 0.
inline ProbabilityBound integrate_intensity(const RateCurve& curve, double t1, double t2,
                                            OutsideSamples outside = OutsideSamples::reject) {
  const auto& s = curve.samples;
  if (!(t1 <= t2)) throw ArgumentError("integrate_intensity: t1 > t2");
  ProbabilityBound b{t1, t2, 0.0, static_cast<int>(s.size())};
  if (t1 == t2) return b;
  if (outside == OutsideSamples::zero && s.size() < 2) return b;
  if (s.size() < 2) throw ArgumentError("integrate_intensity: need >= 2 samples");
  if (outside == OutsideSamples::reject && (t1 < s.front().t || t2 > s.back().t)) {
    throw ArgumentError("integrate_intensity: interval outside sampled range");
  }
  auto value_at = [&](std::size_t i, double t) {
    // linear interpolation on [s[i].t, s[i+1].t]
    const double w = (t - s[i].t) / (s[i + 1].t - s[i].t);
    return s[i].mu_plus + w * (s[i + 1].mu_plus - s[i].mu_plus);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double a = std::max(t1, s[i].t);
    const double c = std::min(t2, s[i + 1].t);
    if (!(c > a)) continue;
    total += 0.5 * (c - a) * (value_at(i, a) + value_at(i, c));
  }
  b.p_upper = total;
  return b;
}

/// t_start, t_start + dt, ... with the last point pinned to t_end.
inline std::vector<double> uniform_grid(double t_start, double t_end, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("uniform_grid: dt must be > 0");
  if (!(t_end > t_start)) throw ArgumentError("uniform_grid: empty interval");
  const auto n = static_cast<std::size_t>(std::ceil((t_end - t_start) / dt - 1e-9));
  std::vector<double> ts(n + 1);
  for (std::size_t k = 0; k < n; ++k) ts[k] = t_start + static_cast<double>(k) * dt;
  ts[n] = t_end;
  return ts;
}

/// Evaluates `eval(t)` (returning a RateSample) on a uniform grid.
template <typename Evaluator>
RateCurve sample_grid(Evaluator&& eval, double t_start, double t_end, double dt) {
  RateCurve c;
  c.t_start = t_start;
  c.t_end = t_end;
  for (double t : uniform_grid(t_start, t_end, dt)) {
    RateSample s = eval(t);
    s.t = t;
    c.samples.push_back(s);
  }
  return c;
}

struct TtcSeed {
  SegmentId segment = SegmentId::front;
  double time = 0.0;
};

/// Positive real roots of p + v t + a t^2 / 2 = line, ascending.
inline std::vector<double> positive_crossing_times(double p, double v, double a,
                                                   double line) {
  std::vector<double> roots;
  const double c = p - line;
  if (std::abs(a) < 1e-12) {
    if (v != 0.0) roots.push_back(-c / v);
  } else {
    const double disc = v * v - 2.0 * a * c;
    if (disc >= 0.0) {
      // Stable quadratic roots of (a/2) t^2 + v t + c = 0.
      const double qq = -0.5 * (v + std::copysign(std::sqrt(disc), v));
      if (qq != 0.0) {
        roots.push_back(qq / (0.5 * a));
        roots.push_back(c / qq);
      } else {
        roots.push_back(0.0);
      }
    }
  }
  std::vector<double> out;
  for (double r : roots) {
    if (r > 0.0 && std::isfinite(r)) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Deterministic constant-acceleration crossing times of the front, right
/// and left side lines from the mean state (no side-extent filtering, rear
/// omitted).
inline std::vector<TtcSeed> deterministic_ttc_seeds(const StateVector& m,
                                                    const HostRectangle& rect) {
  std::vector<TtcSeed> seeds;
  for (double t : positive_crossing_times(m.x, m.xdot, m.xddot, rect.x_front)) {
    seeds.push_back({SegmentId::front, t});
  }
  for (double t : positive_crossing_times(m.y, m.ydot, m.yddot, rect.y_right)) {
    seeds.push_back({SegmentId::right, t});
  }
  for (double t : positive_crossing_times(m.y, m.ydot, m.yddot, rect.y_left)) {
    seeds.push_back({SegmentId::left, t});
  }
  return seeds;
}

struct AdaptiveOptions {
  double dt1 = 0.5;          // s, outward march step
  double dt2 = 0.2;          // s, refinement step
  double rate_floor = 0.01;  // s^-1, march stops below this
  double t_start = 0.0;
  double t_end = 8.0;
  int fallback_points = 8;
};

struct AdaptiveResult {
  RateCurve curve;
  int evaluations = 0;
  bool empty_warning = false;  // nothing found above zero
};

/// Samples an intensity curve sparsely:
///   1. evaluate at the seed times and start from the largest (earliest on ties);
///   2. march left and right in steps of dt1 until a value falls below
///      rate_floor; a step past the horizon is cut back to its edge;
///   3. wherever the slope along a march changes sign, add points at
///      t +- k dt2 (k dt2 < dt1).
/// Without seeds inside the horizon an evenly spaced fallback grid supplies
/// the start candidates. `eval(t)` must return a RateSample.
template <typename Evaluator>
AdaptiveResult adaptive_sample(Evaluator&& eval, const std::vector<TtcSeed>& seeds,
                               const AdaptiveOptions& opt) {
  if (!(opt.dt2 < opt.dt1) || !(opt.dt2 > 0.0)) {
    throw ArgumentError("adaptive_sample: need 0 < dt2 < dt1");
  }
  if (!(opt.rate_floor > 0.0)) throw ArgumentError("adaptive_sample: rate_floor must be > 0");
  if (!(opt.t_end > opt.t_start)) throw ArgumentError("adaptive_sample: empty horizon");

  constexpr double kSameTime = 1e-9;
  std::map<double, RateSample> done;
  auto inside = [&](double t) {
    return t >= opt.t_start - kSameTime && t <= opt.t_end + kSameTime;
  };
  auto evaluate = [&](double t) -> const RateSample& {
    t = std::clamp(t, opt.t_start, opt.t_end);
    auto it = done.lower_bound(t - kSameTime);
    if (it != done.end() && std::abs(it->first - t) <= kSameTime) return it->second;
    RateSample s = eval(t);
    s.t = t;
    return done.emplace(t, s).first->second;
  };

  std::vector<double> starts;
  for (const TtcSeed& s : seeds) {
    if (inside(s.time)) starts.push_back(s.time);
  }
  if (starts.empty()) {
    const int n = std::max(2, opt.fallback_points);
    for (int i = 0; i < n; ++i) {
      starts.push_back(opt.t_start + (opt.t_end - opt.t_start) * i / (n - 1));
    }
  }
  std::sort(starts.begin(), starts.end());
  double t0 = starts.front();
  double best = -1.0;
  for (double t : starts) {
    const double v = evaluate(t).mu_plus;
    if (v > best) {
      best = v;
      t0 = t;
    }
  }

  AdaptiveResult result;
  if (best <= 0.0) {
    bool any = false;
    for (const auto& [t, s] : done) any = any || s.mu_plus > 0.0;
    if (!any) {
      result.empty_warning = true;
      result.evaluations = static_cast<int>(done.size());
      result.curve.t_start = opt.t_start;
      result.curve.t_end = opt.t_end;
      return result;
    }
  }

  std::vector<double> extrema;
  for (int dir : {-1, 1}) {
    std::vector<std::pair<double, double>> march{{t0, evaluate(t0).mu_plus}};
    for (int k = 1;; ++k) {
      double t = t0 + dir * k * opt.dt1;
      const double edge = dir < 0 ? opt.t_start : opt.t_end;
      const bool last = !inside(t);
      if (last) {
        // overshoot: sample the horizon edge once, unless already there
        if (std::abs(march.back().first - edge) <= kSameTime) break;
        t = edge;
      }
      const double v = evaluate(t).mu_plus;
      march.emplace_back(t, v);
      if (last || v < opt.rate_floor) break;
    }
    for (std::size_t i = 1; i + 1 < march.size(); ++i) {
      const double before = march[i].second - march[i - 1].second;
      const double after = march[i + 1].second - march[i].second;
      if (before * after < 0.0) extrema.push_back(march[i].first);
    }
  }
  std::sort(extrema.begin(), extrema.end());
  extrema.erase(std::unique(extrema.begin(), extrema.end()), extrema.end());
  for (double te : extrema) {
    for (int k = 1; k * opt.dt2 < opt.dt1 - kSameTime; ++k) {
      for (double t : {te - k * opt.dt2, te + k * opt.dt2}) {
        if (inside(t)) evaluate(t);
      }
    }
  }

  result.evaluations = static_cast<int>(done.size());
  result.curve.t_start = opt.t_start;
  result.curve.t_end = opt.t_end;
  for (auto& [t, s] : done) result.curve.samples.push_back(s);
  return result;
}

/// Probability that the target position lies inside the rectangle at one
/// instant (orientation ignored).
inline double spatial_overlap_probability(const GaussianDensity& g,
                                          const HostRectangle& rect) {
  rect.validate();
  if (g.dim() < 2) throw ArgumentError("spatial_overlap_probability: need >= 2 dims");
  const GaussianDensity pos = marginalize(g, {0, 1});
  const double sx = std::sqrt(pos.cov()(0, 0));
  const double sy = std::sqrt(pos.cov()(1, 1));
  if (!(sx > 0.0) || !(sy > 0.0)) {
    throw NumericalError("spatial_overlap_probability: degenerate position covariance");
  }
  const double slope = pos.cov()(0, 1) / pos.cov()(0, 0);
  const double var_y_given_x = pos.cov()(1, 1) - pos.cov()(0, 1) * slope;
  if (!(var_y_given_x > 0.0)) {
    throw NumericalError("spatial_overlap_probability: singular position covariance");
  }
  const double sy_x = std::sqrt(var_y_given_x);
  const double x_lo = std::max(rect.x_rear, pos.mean()(0) - kTruncationSigmas * sx);
  const double x_hi = std::min(rect.x_front, pos.mean()(0) + kTruncationSigmas * sx);
  if (!(x_hi > x_lo)) return 0.0;
  auto outer = [&](double x) {
    const double m = pos.mean()(1) + slope * (x - pos.mean()(0));
    const double y_lo = std::max(rect.y_left, m - kTruncationSigmas * sy_x);
    const double y_hi = std::min(rect.y_right, m + kTruncationSigmas * sy_x);
    if (!(y_hi > y_lo)) return 0.0;
    const double inner =
        integrate_adaptive([&](double y) { return normal_pdf(y, m, sy_x); },
                           y_lo, y_hi, kQuadratureRelTol * 1e-2,
                           "spatial_overlap_probability (y)")
            .value;
    return inner * normal_pdf(x, pos.mean()(0), sx);
  };
  const double p = integrate_adaptive(outer, x_lo, x_hi, kQuadratureRelTol,
                                      "spatial_overlap_probability (x)")
                       .value;
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace crossrate
