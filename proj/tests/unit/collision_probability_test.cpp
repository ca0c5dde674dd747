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

#include "crossrate/collision_probability.hpp"

#include <gtest/gtest.h>

#include <set>

#include "crossrate/scenario.hpp"
#include "oracles.hpp"

using crossrate::AdaptiveOptions;
using crossrate::HostRectangle;
using crossrate::IntensityMethod;
using crossrate::RateCurve;
using crossrate::RateSample;
using crossrate::StateVector;

namespace {

const HostRectangle kRect{0.0, -5.0, -1.0, 1.0};

RateSample at(double t, double v) {
  RateSample s;
  s.t = t;
  s.mu_plus = v;
  return s;
}

double bump(double t) { return 0.8 * std::exp(-0.5 * std::pow((t - 3.7) / 0.45, 2)); }

crossrate::RateCurve quad_curve(const crossrate::ScenarioPredictor& pred) {
  return crossrate::sample_grid(
      [&](double t) { return pred.intensity(t, IntensityMethod::quadrature); }, 0.0, 8.0, 0.05);
}

}  // namespace

TEST(IntegrateIntensity, ConstantRate) {
  const RateCurve c = crossrate::sample_grid([](double t) { return at(t, 0.1); }, 0.0, 2.0, 0.3);
  EXPECT_NEAR(crossrate::integrate_intensity(c, 0.0, 2.0).p_upper, 0.2, 1e-15);
  EXPECT_EQ(crossrate::integrate_intensity(c, 1.0, 1.0).p_upper, 0.0);
  EXPECT_NEAR(crossrate::integrate_intensity(c, 0.25, 1.6).p_upper, 0.135, 1e-15);
}

TEST(IntegrateIntensity, LinearRateIsExactOnIrregularGrid) {
  RateCurve c;
  for (double t : {0.0, 0.1, 0.45, 1.2, 1.3, 2.9, 3.0}) c.samples.push_back(at(t, 2.0 * t + 1.0));
  // int (2t + 1) over [0.2, 2.5] = t^2 + t
  EXPECT_NEAR(crossrate::integrate_intensity(c, 0.2, 2.5).p_upper, (6.25 + 2.5) - (0.04 + 0.2),
              1e-13);
}

TEST(IntegrateIntensity, AdditiveAndMonotone) {
  const RateCurve c = crossrate::sample_grid([](double t) { return at(t, bump(t)); }, 0, 8, 0.05);
  for (double t2 : {1.0, 3.33, 4.0, 6.2}) {
    const double a = crossrate::integrate_intensity(c, 0.0, t2).p_upper;
    const double b = crossrate::integrate_intensity(c, t2, 8.0).p_upper;
    EXPECT_NEAR(a + b, crossrate::integrate_intensity(c, 0.0, 8.0).p_upper, 1e-14);
  }
  double prev = 0.0;
  for (double t2 = 0.0; t2 <= 8.0; t2 += 0.13) {
    const double v = crossrate::integrate_intensity(c, 0.0, t2).p_upper;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(IntegrateIntensity, BadArguments) {
  const RateCurve c = crossrate::sample_grid([](double t) { return at(t, 1.0); }, 0.0, 1.0, 0.5);
  EXPECT_THROW(crossrate::integrate_intensity(c, 0.6, 0.5), crossrate::ArgumentError);
  EXPECT_THROW(crossrate::integrate_intensity(c, -0.1, 0.5), crossrate::ArgumentError);
  EXPECT_THROW(crossrate::integrate_intensity(c, 0.5, 1.1), crossrate::ArgumentError);
  EXPECT_NEAR(crossrate::integrate_intensity(c, -1.0, 2.0, crossrate::OutsideSamples::zero).p_upper,
              1.0, 1e-15);
  RateCurve one;
  one.samples.push_back(at(0.0, 1.0));
  EXPECT_THROW(crossrate::integrate_intensity(one, 0.0, 1.0), crossrate::ArgumentError);
}

TEST(UniformGrid, EndpointPinned) {
  const auto g = crossrate::uniform_grid(0.0, 8.0, 0.05);
  ASSERT_EQ(g.size(), 161u);
  EXPECT_EQ(g.back(), 8.0);
  EXPECT_NEAR(g[37], 1.85, 1e-12);
  const auto h = crossrate::uniform_grid(0.0, 1.0, 0.3);
  EXPECT_EQ(h.back(), 1.0);
  EXPECT_NEAR(h[h.size() - 2], 0.9, 1e-12);
}

TEST(TtcSeeds, ConstantSpeed) {
  StateVector s;
  s.x = 10.0;
  s.xdot = -2.0;
  s.y = 4.0;
  const auto seeds = crossrate::deterministic_ttc_seeds(s, kRect);
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(seeds[0].segment, crossrate::SegmentId::front);
  EXPECT_NEAR(seeds[0].time, 5.0, 1e-12);
}

TEST(TtcSeeds, Decelerating) {
  StateVector s;
  s.x = 10.0;
  s.xdot = -2.0;
  s.xddot = -0.2;
  const auto seeds = crossrate::deterministic_ttc_seeds(s, kRect);
  ASSERT_EQ(seeds.size(), 1u);
  const double t = seeds[0].time;
  EXPECT_NEAR(t, 10.0 * (std::sqrt(2.0) - 1.0), 1e-12);
  EXPECT_LT(std::abs(10.0 - 2.0 * t - 0.1 * t * t), 1e-9);
}

TEST(TtcSeeds, RecedingHasNoFrontSeed) {
  StateVector s;
  s.x = 10.0;
  s.xdot = 2.0;
  s.y = 4.0;
  for (const auto& seed : crossrate::deterministic_ttc_seeds(s, kRect)) {
    EXPECT_NE(seed.segment, crossrate::SegmentId::front);
  }
}

TEST(TtcSeeds, SideLinesAndRootsSubstitute) {
  StateVector s;
  s.x = 12.0;
  s.xdot = -3.0;
  s.xddot = 0.3;
  s.y = 6.0;
  s.ydot = -2.5;
  s.yddot = 0.3;
  std::multiset<crossrate::SegmentId> seen;
  for (const auto& seed : crossrate::deterministic_ttc_seeds(s, kRect)) {
    EXPECT_GT(seed.time, 0.0);
    seen.insert(seed.segment);
    const double t = seed.time;
    double r = 0.0;
    switch (seed.segment) {
      case crossrate::SegmentId::front: r = s.x + s.xdot * t + 0.5 * s.xddot * t * t - 0.0; break;
      case crossrate::SegmentId::right: r = s.y + s.ydot * t + 0.5 * s.yddot * t * t - 1.0; break;
      case crossrate::SegmentId::left: r = s.y + s.ydot * t + 0.5 * s.yddot * t * t + 1.0; break;
      case crossrate::SegmentId::rear: ADD_FAILURE() << "rear seed"; break;
    }
    EXPECT_LT(std::abs(r), 1e-9);
  }
  // y(t) = 6 - 2.5 t + 0.15 t^2 has two positive roots at +-1; x has two at 0
  EXPECT_EQ(seen.count(crossrate::SegmentId::front), 2u);
  EXPECT_EQ(seen.count(crossrate::SegmentId::right), 2u);
  EXPECT_EQ(seen.count(crossrate::SegmentId::left), 2u);
}

TEST(AdaptiveSample, GaussianBumpMatchesDenseGrid) {
  const std::vector<crossrate::TtcSeed> seeds{{crossrate::SegmentId::front, 3.2}};
  int calls = 0;
  std::set<double> times;
  const auto r = crossrate::adaptive_sample(
      [&](double t) {
        ++calls;
        EXPECT_TRUE(times.insert(t).second) << "duplicate t=" << t;
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, 8.0);
        return at(t, bump(t));
      },
      seeds, AdaptiveOptions{});
  EXPECT_EQ(r.evaluations, calls);
  EXPECT_FALSE(r.empty_warning);
  const RateCurve dense =
      crossrate::sample_grid([](double t) { return at(t, bump(t)); }, 0.0, 8.0, 0.05);
  const double d = crossrate::integrate_intensity(dense, 0.0, 8.0).p_upper;
  const double a =
      crossrate::integrate_intensity(r.curve, 0.0, 8.0, crossrate::OutsideSamples::zero).p_upper;
  EXPECT_NEAR(a, d, 0.05 * d);
  EXPECT_NEAR(d, 0.8 * 0.45 * std::sqrt(2 * M_PI), 1e-6);
  for (std::size_t i = 1; i < r.curve.samples.size(); ++i) {
    EXPECT_LT(r.curve.samples[i - 1].t, r.curve.samples[i].t);
  }
}

TEST(AdaptiveSample, StaysInsideHorizon) {
  const std::vector<crossrate::TtcSeed> seeds{{crossrate::SegmentId::front, 0.3},
                                              {crossrate::SegmentId::right, 9.0}};
  AdaptiveOptions opt;
  opt.rate_floor = 1e-9;
  const auto r = crossrate::adaptive_sample(
      [&](double t) {
        EXPECT_GE(t, opt.t_start);
        EXPECT_LE(t, opt.t_end);
        return at(t, 1.0 / (1.0 + t));
      },
      seeds, opt);
  EXPECT_EQ(r.curve.samples.front().t, 0.0);
  EXPECT_EQ(r.curve.samples.back().t, 8.0);
}

TEST(AdaptiveSample, FallbackWithoutSeeds) {
  const auto r = crossrate::adaptive_sample([](double t) { return at(t, bump(t)); }, {},
                                            AdaptiveOptions{});
  EXPECT_FALSE(r.empty_warning);
  double best = 0.0;
  for (const auto& s : r.curve.samples) best = std::max(best, s.mu_plus);
  EXPECT_GT(best, 0.6);
}

TEST(AdaptiveSample, ZeroEverywhereWarns) {
  const auto r = crossrate::adaptive_sample([](double t) { return at(t, 0.0); }, {},
                                            AdaptiveOptions{});
  EXPECT_TRUE(r.empty_warning);
  EXPECT_TRUE(r.curve.samples.empty());
  EXPECT_EQ(r.evaluations, 8);
  EXPECT_EQ(crossrate::integrate_intensity(r.curve, 0.0, 8.0, crossrate::OutsideSamples::zero)
                .p_upper,
            0.0);
}

TEST(AdaptiveSample, RejectsBadSteps) {
  AdaptiveOptions opt;
  opt.dt2 = 0.5;
  auto f = [](double t) { return at(t, 1.0); };
  EXPECT_THROW(crossrate::adaptive_sample(f, {}, opt), crossrate::ArgumentError);
  opt = AdaptiveOptions{};
  opt.rate_floor = 0.0;
  EXPECT_THROW(crossrate::adaptive_sample(f, {}, opt), crossrate::ArgumentError);
}

TEST(AdaptiveSample, ShippedScenarios) {
  const std::pair<const char*, int> cases[] = {{"front", 15}, {"front-right", 14}};
  for (const auto& [name, max_evals] : cases) {
    const crossrate::ScenarioPredictor pred(crossrate::preset(name));
    const auto seeds = crossrate::deterministic_ttc_seeds(
        crossrate::StateVector::from(pred.initial().mean()), kRect);
    const auto r = crossrate::adaptive_sample(
        [&](double t) { return pred.intensity(t, IntensityMethod::quadrature); }, seeds,
        AdaptiveOptions{});
    EXPECT_LE(r.evaluations, max_evals) << name;
    const double d = crossrate::integrate_intensity(quad_curve(pred), 0.0, 8.0).p_upper;
    const double a =
        crossrate::integrate_intensity(r.curve, 0.0, 8.0, crossrate::OutsideSamples::zero)
            .p_upper;
    EXPECT_GE(a, 0.0);
    EXPECT_NEAR(a, d, 0.05 * d) << name;
  }
}

TEST(ProbabilityBound, FrontExceedsSixtyPercentBySixSeconds) {
  const crossrate::ScenarioPredictor pred(crossrate::preset("front"));
  EXPECT_GT(crossrate::integrate_intensity(quad_curve(pred), 0.0, 6.0).p_upper, 0.6);
}

TEST(SpatialOverlap, TightAndFar) {
  Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
  m(0) = -2.0;
  const Eigen::Matrix<double, 6, 6> c = Eigen::Matrix<double, 6, 6>::Identity() * 1e-4;
  EXPECT_NEAR(crossrate::spatial_overlap_probability(crossrate::GaussianDensity(m, c), kRect), 1.0,
              1e-12);
  m(0) = 1.0 + 100 * 0.01;
  m(1) = 100.0;
  EXPECT_LT(crossrate::spatial_overlap_probability(crossrate::GaussianDensity(m, c), kRect),
            1e-15);
}

TEST(SpatialOverlap, CorrelatedMatchesBruteForce) {
  Eigen::Vector2d m(-0.3, 0.6);
  Eigen::Matrix2d c;
  c << 1.2, 0.5, 0.5, 0.7;
  Eigen::Matrix<double, 6, 1> m6 = Eigen::Matrix<double, 6, 1>::Zero();
  m6.head<2>() = m;
  Eigen::Matrix<double, 6, 6> c6 = Eigen::Matrix<double, 6, 6>::Identity();
  c6.topLeftCorner<2, 2>() = c;
  const double ref = oracle::simpson2d(
      [&](double x, double y) { return oracle::mvn_pdf(Eigen::Vector2d(x, y), m, c); }, -5.0, 0.0,
      -1.0, 1.0, 600, 600);
  EXPECT_NEAR(crossrate::spatial_overlap_probability(crossrate::GaussianDensity(m6, c6), kRect),
              ref, 1e-9);
}

TEST(SpatialOverlap, FrontPeakComesAfterDeterministicTtc) {
  const crossrate::ScenarioPredictor pred(crossrate::preset("front"));
  const auto seeds = crossrate::deterministic_ttc_seeds(
      crossrate::StateVector::from(pred.initial().mean()), kRect);
  double ttc = 1e9;
  for (const auto& s : seeds) {
    if (s.segment == crossrate::SegmentId::front) ttc = std::min(ttc, s.time);
  }
  ASSERT_LT(ttc, 8.0);
  double best = -1.0, t_best = 0.0;
  for (double t : crossrate::uniform_grid(0.0, 8.0, 0.05)) {
    const double p = crossrate::spatial_overlap_probability(pred.at(t), kRect);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    if (p > best) {
      best = p;
      t_best = t;
    }
  }
  EXPECT_GT(t_best, ttc);
}
