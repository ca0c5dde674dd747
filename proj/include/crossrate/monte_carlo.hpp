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

// Monte-Carlo ground truth: sampled initial states propagated through the
// noisy jerk model, boundary crossings captured on every step chord, and
// the resulting first-entry / all-entry histograms and entry multiplicities.
//
// Every trajectory is a pure function of (config, seed, trajectory id), and
// all accumulators are integer counts, so results do not depend on the
// number of threads.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "crossrate/boundary.hpp"
#include "crossrate/collision_probability.hpp"
#include "crossrate/errors.hpp"
#include "crossrate/scenario.hpp"
#include "crossrate/vehicle_dynamics.hpp"

namespace crossrate {

/// Independent generator for one trajectory of a seeded campaign.
inline std::mt19937_64 trajectory_rng(std::uint64_t seed, std::int64_t traj_id) {
  const auto id = static_cast<std::uint64_t>(traj_id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id),
                    static_cast<std::uint32_t>(id >> 32), 0x63726f73u};
  return std::mt19937_64(seq);
}

/// Draws x = mean + A z with A A^T = cov (symmetric square root, so PSD
/// covariances with zero eigenvalues are fine).
class InitialSampler {
 public:
  InitialSampler(const Vector6& mean, const Matrix6& cov) : mean_(mean) {
    const Matrix6 sym = symmetrized(cov);
    Eigen::SelfAdjointEigenSolver<Matrix6> es(sym);
    if (es.info() != Eigen::Success) {
      throw ConfigError("/initial_cov", "eigen-decomposition failed");
    }
    const double trace = std::max(sym.trace(), 0.0);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 1e-300)) {
      throw ConfigError("/initial_cov", "covariance is not positive semi-definite");
    }
    factor_ = es.eigenvectors() *
              es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  explicit InitialSampler(const ScenarioConfig& c)
      : InitialSampler(c.initial_mean.vec(), resolve_initial_cov(c)) {}

  template <typename Rng>
  StateVector draw(Rng& rng) const {
    std::normal_distribution<double> normal;
    Vector6 z;
    for (int i = 0; i < 6; ++i) z(i) = normal(rng);
    return StateVector::from(mean_ + factor_ * z);
  }

  const Vector6& mean() const { return mean_; }
  const Matrix6& factor() const { return factor_; }

 private:
  Vector6 mean_;
  Matrix6 factor_;
};

template <typename Rng>
StateVector sample_initial(const InitialSampler& sampler, Rng& rng) {
  return sampler.draw(rng);
}

/// Crossings of one simulated trajectory.
struct CollisionRecord {
  std::int64_t traj_id = 0;
  std::vector<CrossingEvent> events;
  int n_entries_host = 0;                   // N+ for the whole boundary
  std::array<int, 4> entries_per_segment{};  // all entries through each side

  const CrossingEvent* first_entry() const {
    for (const CrossingEvent& e : events) {
      if (e.kind == CrossingKind::entry) return &e;
    }
    return nullptr;
  }
};

/// Exact discrete-time propagation of the linear model: deterministic part
/// by the transition matrix plus the precomputed forced response of each
/// step, noise increments drawn from Q(step).
class TrajectorySimulator {
 public:
  explicit TrajectorySimulator(const ScenarioConfig& c) : config_(c) {
    c.validate();
    steps_ = std::max<int>(1, static_cast<int>(std::ceil(c.horizon / c.sim_step - 1e-9)));
    step_ = c.horizon / steps_;
    phi_ = transition_matrix(step_);
    const Matrix6 q = process_noise_cov(step_, c.model);
    noisy_ = c.model.qx > 0.0 || c.model.qy > 0.0;
    noise_factor_.setZero();
    if (noisy_) {
      // Q is block diagonal per axis; factor each 3x3 block.
      for (int axis = 0; axis < 2; ++axis) {
        Eigen::Matrix3d block;
        for (int r = 0; r < 3; ++r) {
          for (int col = 0; col < 3; ++col) block(r, col) = q(axis + 2 * r, axis + 2 * col);
        }
        if (block.isZero(0.0)) continue;
        const Eigen::LLT<Eigen::Matrix3d> llt(block);
        if (llt.info() != Eigen::Success) {
          throw NumericalError("TrajectorySimulator: process noise factorization failed");
        }
        const Eigen::Matrix3d l = llt.matrixL();
        for (int r = 0; r < 3; ++r) {
          for (int col = 0; col < 3; ++col) {
            noise_factor_(axis + 2 * r, axis + 2 * col) = l(r, col);
          }
        }
      }
    }
    forced_.resize(steps_);
    for (int k = 0; k < steps_; ++k) forced_[k] = input_response(k * step_, step_, c.model);
  }

  int steps() const { return steps_; }
  double step() const { return step_; }
  const ScenarioConfig& config() const { return config_; }

  template <typename Rng>
  CollisionRecord run(const StateVector& x0, Rng& rng, std::int64_t traj_id = 0) const {
    CollisionRecord rec;
    rec.traj_id = traj_id;
    std::normal_distribution<double> normal;
    Vector6 x = x0.vec();
    double heading = std::atan2(x(3), x(2));
    Eigen::Vector2d p0 = tracked_point(x, heading);
    for (int k = 0; k < steps_; ++k) {
      Vector6 next = phi_ * x + forced_[k];
      if (noisy_) {
        Vector6 z;
        for (int i = 0; i < 6; ++i) z(i) = normal(rng);
        next += noise_factor_ * z;
      }
      const Eigen::Vector2d p1 = tracked_point(next, heading);
      for (const ChordCrossing& c : detect_crossings(p0, p1, config_.rect)) {
        rec.events.push_back({(k + c.fraction) * step_, c.segment, c.point, c.kind});
        if (c.kind == CrossingKind::entry) {
          ++rec.n_entries_host;
          ++rec.entries_per_segment[index_of(c.segment)];
          if (config_.terminate_on_entry) return rec;
        }
      }
      x = next;
      p0 = p1;
    }
    return rec;
  }

 private:
  Eigen::Vector2d tracked_point(const Vector6& x, double& heading) const {
    if (!config_.salient) return x.head<2>();
    if (std::hypot(x(2), x(3)) > kMinHeadingSpeed) heading = std::atan2(x(3), x(2));
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    const SalientOffset& o = *config_.salient;
    return {x(0) + c * o.dx_body - s * o.dy_body, x(1) + s * o.dx_body + c * o.dy_body};
  }

  ScenarioConfig config_;
  int steps_ = 0;
  double step_ = 0.0;
  Matrix6 phi_;
  Matrix6 noise_factor_;
  bool noisy_ = false;
  std::vector<Vector6> forced_;
};

template <typename Rng>
CollisionRecord simulate_trajectory(const StateVector& x0, const ScenarioConfig& c,
                                    Rng& rng) {
  return TrajectorySimulator(c).run(x0, rng);
}

/// Binned entry counts. Rates are counts / (n_traj * bin_width).
struct RateHistogram {
  double bin_width = 0.05;
  std::int64_t n_traj = 0;
  std::vector<std::int64_t> first_total;  // first whole-boundary entries
  std::array<std::vector<std::int64_t>, 4> first_by_segment;  // same, by side
  std::array<std::vector<std::int64_t>, 4> all_by_segment;    // every entry
  std::array<std::vector<std::int64_t>, 4> segment_first;     // first entry through each side

  RateHistogram() = default;
  RateHistogram(double width, std::size_t bins) : bin_width(width), first_total(bins, 0) {
    for (int s = 0; s < 4; ++s) {
      first_by_segment[s].assign(bins, 0);
      all_by_segment[s].assign(bins, 0);
      segment_first[s].assign(bins, 0);
    }
  }
  std::size_t n_bins() const { return first_total.size(); }
  double bin_start(std::size_t i) const { return static_cast<double>(i) * bin_width; }
  double bin_mid(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width; }
  std::size_t bin_of(double t) const {
    const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(t / bin_width)));
    return std::min(i, n_bins() - 1);
  }
  double rate(std::int64_t count) const {
    return static_cast<double>(count) / (static_cast<double>(n_traj) * bin_width);
  }
  std::vector<std::int64_t> all_total() const {
    std::vector<std::int64_t> out(n_bins(), 0);
    for (const auto& seg : all_by_segment) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += seg[i];
    }
    return out;
  }
};

/// Entry multiplicity table and per-side totals.
struct EntryStatistics {
  std::int64_t n_traj = 0;
  std::vector<std::int64_t> multiplicity;  // H(N+ = k) at index k
  std::array<std::int64_t, 4> first_entries_by_segment{};
  std::array<std::int64_t, 4> all_entries_by_segment{};
  std::array<std::int64_t, 4> segment_first_entries{};

  std::int64_t count(std::size_t k) const {
    return k < multiplicity.size() ? multiplicity[k] : 0;
  }
  std::int64_t at_least_one() const { return n_traj - count(0); }
  double probability(std::size_t k) const {
    return static_cast<double>(count(k)) / static_cast<double>(n_traj);
  }
  double p_at_least_one() const {
    return static_cast<double>(at_least_one()) / static_cast<double>(n_traj);
  }
};

struct CampaignResult {
  RateHistogram histogram;
  EntryStatistics stats;
  std::vector<double> integrated_probability;  // first-entry fraction by bin end
};

namespace detail {

struct CampaignAccumulator {
  RateHistogram hist;
  EntryStatistics stats;

  CampaignAccumulator(double width, std::size_t bins) : hist(width, bins) {}

  void add(const CollisionRecord& rec) {
    const auto n = static_cast<std::size_t>(rec.n_entries_host);
    if (stats.multiplicity.size() <= n) stats.multiplicity.resize(n + 1, 0);
    ++stats.multiplicity[n];
    bool first = true;
    std::array<bool, 4> seen{};
    for (const CrossingEvent& e : rec.events) {
      if (e.kind != CrossingKind::entry) continue;
      const int s = index_of(e.segment);
      const std::size_t b = hist.bin_of(e.time);
      ++hist.all_by_segment[s][b];
      ++stats.all_entries_by_segment[s];
      if (first) {
        ++hist.first_total[b];
        ++hist.first_by_segment[s][b];
        ++stats.first_entries_by_segment[s];
        first = false;
      }
      if (!seen[s]) {
        ++hist.segment_first[s][b];
        ++stats.segment_first_entries[s];
        seen[s] = true;
      }
    }
  }

  void merge(const CampaignAccumulator& o) {
    auto add_vec = [](std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
      if (a.size() < b.size()) a.resize(b.size(), 0);
      for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    };
    add_vec(hist.first_total, o.hist.first_total);
    for (int s = 0; s < 4; ++s) {
      add_vec(hist.first_by_segment[s], o.hist.first_by_segment[s]);
      add_vec(hist.all_by_segment[s], o.hist.all_by_segment[s]);
      add_vec(hist.segment_first[s], o.hist.segment_first[s]);
      stats.first_entries_by_segment[s] += o.stats.first_entries_by_segment[s];
      stats.all_entries_by_segment[s] += o.stats.all_entries_by_segment[s];
      stats.segment_first_entries[s] += o.stats.segment_first_entries[s];
    }
    add_vec(stats.multiplicity, o.stats.multiplicity);
  }
};

inline std::size_t bin_count(double horizon, double width) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(horizon / width - 1e-9)));
}

/// Runs body(begin, end, slot) over contiguous chunks of [0, n).
template <typename Body>
void parallel_chunks(std::int64_t n, int threads, Body&& body) {
  threads = std::max(1, static_cast<int>(std::min<std::int64_t>(threads, n)));
  if (threads == 1) {
    body(std::int64_t{0}, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) {
    const std::int64_t b = n * i / threads;
    const std::int64_t e = n * (i + 1) / threads;
    pool.emplace_back([&body, b, e, i] { body(b, e, i); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Simulates config.n_traj trajectories and merges their statistics.
inline CampaignResult run_campaign(const ScenarioConfig& config, int threads = 1) {
  config.validate();
  const InitialSampler sampler(config);
  const TrajectorySimulator sim(config);
  const std::size_t bins = detail::bin_count(config.horizon, config.bin_width);
  const int n_slots =
      std::max(1, static_cast<int>(std::min<std::int64_t>(threads, config.n_traj)));
  std::vector<detail::CampaignAccumulator> acc(
      n_slots, detail::CampaignAccumulator(config.bin_width, bins));
  detail::parallel_chunks(config.n_traj, n_slots,
                          [&](std::int64_t b, std::int64_t e, int slot) {
                            for (std::int64_t id = b; id < e; ++id) {
                              auto rng = trajectory_rng(config.seed, id);
                              const StateVector x0 = sampler.draw(rng);
                              acc[slot].add(sim.run(x0, rng, id));
                            }
                          });
  for (int i = 1; i < n_slots; ++i) acc[0].merge(acc[i]);

  CampaignResult out;
  out.histogram = std::move(acc[0].hist);
  out.histogram.n_traj = config.n_traj;
  out.stats = std::move(acc[0].stats);
  out.stats.n_traj = config.n_traj;
  out.integrated_probability.resize(bins);
  std::int64_t cum = 0;
  for (std::size_t i = 0; i < bins; ++i) {
    cum += out.histogram.first_total[i];
    out.integrated_probability[i] =
        static_cast<double>(cum) / static_cast<double>(config.n_traj);
  }
  return out;
}

/// Initial-condition-only TTC histograms: per draw, the constant-acceleration
/// crossing times of each side line, keeping the earliest root that lies on
/// the side and enters from outside. Process noise and the jerk input play no
/// part here.
struct TtcHistogram {
  double bin_width = 0.05;
  std::int64_t n_draws = 0;
  std::array<std::vector<std::int64_t>, 4> by_segment;  // rear stays empty

  std::size_t n_bins() const { return by_segment[0].size(); }
  double bin_mid(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width; }
  double rate(std::int64_t count) const {
    return static_cast<double>(count) / (static_cast<double>(n_draws) * bin_width);
  }
  std::int64_t total(std::size_t i) const {
    std::int64_t s = 0;
    for (const auto& v : by_segment) s += v[i];
    return s;
  }
};

inline constexpr double kTtcEntryEpsilon = 1e-6;  // s

/// Earliest valid entry time through `seg` for a constant-acceleration
/// trajectory, or a negative value when there is none.
inline double earliest_valid_ttc(const StateVector& s, const BoundarySegment& seg) {
  const bool along_x = seg.normal_along_x();
  const double line = seg.offset * (along_x ? seg.outward().x() : seg.outward().y());
  const double p = along_x ? s.x : s.y;
  const double v = along_x ? s.xdot : s.ydot;
  const double a = along_x ? s.xddot : s.yddot;
  const double sign = along_x ? seg.outward().x() : seg.outward().y();
  for (double t : positive_crossing_times(p, v, a, line)) {
    const double q = along_x ? s.y + s.ydot * t + 0.5 * s.yddot * t * t
                             : s.x + s.xdot * t + 0.5 * s.xddot * t * t;
    if (q < seg.tangent_lo || q > seg.tangent_hi) continue;
    const double te = t - kTtcEntryEpsilon;
    const double before = p + v * te + 0.5 * a * te * te;
    if (sign * (before - line) > 0.0) return t;
  }
  return -1.0;
}

inline TtcHistogram ttc_monte_carlo(const ScenarioConfig& config, int threads = 1) {
  config.validate();
  const InitialSampler sampler(config);
  const auto segs = segments(config.rect);
  const std::size_t bins = detail::bin_count(config.horizon, config.bin_width);
  const int n_slots =
      std::max(1, static_cast<int>(std::min<std::int64_t>(threads, config.n_traj)));
  std::vector<TtcHistogram> parts(n_slots);
  for (auto& h : parts) {
    h.bin_width = config.bin_width;
    for (auto& v : h.by_segment) v.assign(bins, 0);
  }
  detail::parallel_chunks(config.n_traj, n_slots,
                          [&](std::int64_t b, std::int64_t e, int slot) {
                            for (std::int64_t id = b; id < e; ++id) {
                              auto rng = trajectory_rng(config.seed, id);
                              const StateVector x0 = sampler.draw(rng);
                              for (const BoundarySegment& seg : segs) {
                                if (seg.id == SegmentId::rear) continue;
                                const double t = earliest_valid_ttc(x0, seg);
                                if (t < 0.0 || t >= config.horizon) continue;
                                const auto i = std::min(
                                    bins - 1, static_cast<std::size_t>(t / config.bin_width));
                                ++parts[slot].by_segment[index_of(seg.id)][i];
                              }
                            }
                          });
  TtcHistogram out = std::move(parts[0]);
  for (int i = 1; i < n_slots; ++i) {
    for (int s = 0; s < 4; ++s) {
      for (std::size_t k = 0; k < bins; ++k) out.by_segment[s][k] += parts[i].by_segment[s][k];
    }
  }
  out.n_draws = config.n_traj;
  return out;
}

}  // namespace crossrate
