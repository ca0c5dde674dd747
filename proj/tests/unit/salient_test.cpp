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

#include "crossrate/salient.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using crossrate::Matrix6;
using crossrate::SalientOffset;
using crossrate::StateVector;
using crossrate::Vector6;

TEST(SalientState, ZeroOffsetIsIdentity) {
  const StateVector s{3, -1, 2, 0.5, 0.3, -0.4};
  EXPECT_EQ(crossrate::salient_transform_state(s, {0, 0}).vec(), s.vec());
}

TEST(SalientState, StraightMotionTranslatesOnly) {
  const StateVector out = crossrate::salient_transform_state({0, 0, 1, 0, 0, 0}, {2, 1});
  EXPECT_DOUBLE_EQ(out.x, 2.0);
  EXPECT_DOUBLE_EQ(out.y, 1.0);
  EXPECT_DOUBLE_EQ(out.xdot, 1.0);
  EXPECT_DOUBLE_EQ(out.ydot, 0.0);
}

TEST(SalientState, TurningAddsRigidBodyVelocity) {
  // heading rate 1 rad/s; omega x r for r = (1, 0) is (0, 1)
  const StateVector out = crossrate::salient_transform_state({0, 0, 1, 0, 0, 1}, {1, 0});
  EXPECT_DOUBLE_EQ(out.xdot, 1.0);
  EXPECT_DOUBLE_EQ(out.ydot, 1.0);
}

TEST(SalientState, StandstillThrows) {
  EXPECT_THROW(crossrate::salient_transform_state({0, 0, 0, 0, 1, 0}, {1, 0}),
               crossrate::DomainError);
}

TEST(SalientState, DerivativesMatchTimeDifferences) {
  // Along a reference trajectory with jerk input, the transformed velocity
  // and acceleration must be the time derivatives of the transformed position.
  crossrate::MotionModel m;
  m.b1 = -0.4;
  m.b2 = 0.7;
  m.omega = 0.9;
  m.input_enabled = true;
  const StateVector s0{10, 10, -2, -1.6, 0.3, -0.5};
  const SalientOffset off{3.5, -0.9};
  auto corner = [&](double t) {
    const StateVector ref = crossrate::predict_mean(s0, t, m);
    return crossrate::salient_transform_state(ref, off, crossrate::jerk_input(t, m));
  };
  const double h = 1e-4;
  for (double t : {0.5, 1.7, 3.2}) {
    const StateVector c = corner(t), cp = corner(t + h), cm = corner(t - h);
    EXPECT_NEAR(c.xdot, (cp.x - cm.x) / (2 * h), 1e-6);
    EXPECT_NEAR(c.ydot, (cp.y - cm.y) / (2 * h), 1e-6);
    EXPECT_NEAR(c.xddot, (cp.x - 2 * c.x + cm.x) / (h * h), 1e-3);
    EXPECT_NEAR(c.yddot, (cp.y - 2 * c.y + cm.y) / (h * h), 1e-3);
    EXPECT_NEAR(c.xddot, (cp.xdot - cm.xdot) / (2 * h), 1e-6);
    EXPECT_NEAR(c.yddot, (cp.ydot - cm.ydot) / (2 * h), 1e-6);
  }
}

TEST(SalientJacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(-20, 20), vel(-6, 6), acc(-2, 2), d(-3, 3);
  int checked = 0;
  while (checked < 300) {
    Vector6 x;
    x << pos(rng), pos(rng), vel(rng), vel(rng), acc(rng), acc(rng);
    if (x.segment<2>(2).norm() < 0.5) continue;
    const SalientOffset off{d(rng), d(rng)};
    const Eigen::Vector2d jerk(acc(rng), acc(rng));
    auto f = [&](const Eigen::VectorXd& v) {
      return Eigen::VectorXd(
          crossrate::salient_transform_state(StateVector::from(v), off, jerk).vec());
    };
    const Eigen::MatrixXd fd = oracle::central_jacobian(f, x);
    const Matrix6 j = crossrate::salient_jacobian(StateVector::from(x), off, jerk);
    EXPECT_LT((fd - j).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, j.cwiseAbs().maxCoeff()));
    ++checked;
  }
}

TEST(SalientDensity, ZeroOffsetIsIdentity) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd c = oracle::random_spd(6, rng, 0.01, 0.3);
  const crossrate::GaussianDensity g(Vector6(10, 0, -2, 0.4, -0.2, 0), c);
  const auto t = crossrate::salient_transform_density(g, {0, 0});
  EXPECT_TRUE(t.mean().isApprox(g.mean(), 1e-15));
  EXPECT_TRUE(t.cov().isApprox(g.cov(), 1e-14));
}

TEST(SalientDensity, LinearizedMeanAgreesWithSampling) {
  // straight motion along x, diagonal covariance
  const Vector6 m(0, 0, 10, 0, 0, 0);
  const Vector6 var(0.1, 0.1, 0.01, 0.01, 0.001, 0.001);
  const crossrate::GaussianDensity g(m, Matrix6(var.asDiagonal()));
  const SalientOffset off{3.5, 0.9};
  const auto t = crossrate::salient_transform_density(g, off);
  // position shifts by the offset
  EXPECT_NEAR(t.mean()(0), 3.5, 1e-12);
  EXPECT_NEAR(t.mean()(1), 0.9, 1e-12);
  EXPECT_NEAR(t.mean()(2), 10.0, 1e-12);
  EXPECT_NEAR(t.mean()(3), 0.0, 1e-12);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  const int n = 100000;
  Vector6 sum = Vector6::Zero();
  for (int i = 0; i < n; ++i) {
    Vector6 z;
    for (int k = 0; k < 6; ++k) z(k) = nd(rng) * std::sqrt(var(k));
    sum += crossrate::salient_transform_state(StateVector::from(m + z), off).vec();
  }
  const Vector6 mc = sum / n;
  for (int k = 0; k < 6; ++k) {
    const double se = std::sqrt(t.cov()(k, k) / n);
    EXPECT_LT(std::abs(mc(k) - t.mean()(k)), 3 * se) << "component " << k;
  }
}
