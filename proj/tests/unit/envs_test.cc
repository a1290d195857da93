// Copyright 2026 The mdpfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "mdpfuzz/envs/acas_toy.h"
#include "mdpfuzz/envs/chain.h"
#include "mdpfuzz/envs/coopnav_toy.h"
#include "mdpfuzz/envs/registry.h"
#include "mdpfuzz/error.h"
#include "support/oracles.h"

namespace mdpfuzz::envs {
namespace {

constexpr double kPi = std::numbers::pi;

State Acas(double rho, double theta, double psi, double v_own, double v_int) {
  State s(5);
  s << rho, theta, psi, v_own, v_int;
  return s;
}

TEST(AcasToy, CoHeadingEqualSpeedsKeepsGeometry) {
  AcasToyEnvironment env;
  RandomStream rng(0);
  const State s = Acas(3000, 0.7, 0.0, 400, 400);
  const State n = env.Step(s, MakeAcasAction(AcasAction::kCoc), rng);
  EXPECT_NEAR(n[kAcasRho], 3000, 1e-9);
  EXPECT_NEAR(n[kAcasTheta], 0.7, 1e-12);
  EXPECT_NEAR(n[kAcasPsi], 0.0, 1e-12);
}

TEST(AcasToy, HeadOnClosesAtSummedSpeed) {
  AcasToyEnvironment env;
  RandomStream rng(0);
  const State s = Acas(9000, 0.0, kPi, 500, 700);
  const State n = env.Step(s, MakeAcasAction(AcasAction::kCoc), rng);
  EXPECT_NEAR(n[kAcasRho], 9000 - 1200, 1e-9);
}

TEST(AcasToy, WeakLeftMatchesFineGrainedIntegration) {
  AcasToyEnvironment env;
  RandomStream rng(0);
  const State s = Acas(4000, 0.4, -2.0, 600, 800);
  const State n = env.Step(s, MakeAcasAction(AcasAction::kWeakLeft), rng);

  // Integrate both aircraft in the initial ownship frame with tiny steps.
  const double omega = 1.5 * kPi / 180.0;
  const int steps = 100000;
  const double h = 1.0 / steps;
  double ox = 0, oy = 0, heading = 0;
  double ix = 4000 * std::cos(0.4), iy = 4000 * std::sin(0.4);
  for (int i = 0; i < steps; ++i) {
    const double mid = heading + 0.5 * omega * h;
    ox += 600 * std::cos(mid) * h;
    oy += 600 * std::sin(mid) * h;
    heading += omega * h;
    ix += 800 * std::cos(-2.0) * h;
    iy += 800 * std::sin(-2.0) * h;
  }
  const double dx = ix - ox, dy = iy - oy;
  const double rho = std::hypot(dx, dy);
  const double theta = std::atan2(dy, dx) - heading;
  EXPECT_NEAR(n[kAcasRho], rho, 1e-6);
  EXPECT_NEAR(n[kAcasTheta], theta, 1e-9);
  EXPECT_NEAR(n[kAcasPsi], -2.0 - heading, 1e-12);
  EXPECT_EQ(n[kAcasVOwn], 600);
  EXPECT_EQ(n[kAcasVInt], 800);
}

TEST(AcasToy, OracleRewardAndPolicy) {
  AcasToyEnvironment env;
  AcasScriptedPolicy policy;
  EXPECT_TRUE(env.Crashed(Acas(0, 0, 0, 500, 500)));
  EXPECT_FALSE(env.Crashed(Acas(500, 0, 0, 500, 500)));
  EXPECT_DOUBLE_EQ(env.Reward(Acas(50000, 0, 0, 500, 500), MakeAcasAction(AcasAction::kCoc)),
                   1.0);
  EXPECT_EQ(ToAcasAction(policy.Act(Acas(4000, 0.0, kPi, 500, 500))), AcasAction::kStrongLeft);
  EXPECT_EQ(ToAcasAction(policy.Act(Acas(4000, 0.3, kPi, 500, 500))), AcasAction::kStrongRight);
  EXPECT_EQ(ToAcasAction(policy.Act(Acas(4000, -2.0, kPi, 500, 500))), AcasAction::kWeakLeft);
  // Blind spot behind the ownship.
  EXPECT_EQ(ToAcasAction(policy.Act(Acas(2500, 2.9, 0.0, 300, 900))), AcasAction::kCoc);
}

TEST(AcasToy, HeadOnBelowCrashRadiusAfterOneStep) {
  AcasToyEnvironment env;
  AcasScriptedPolicy policy;
  const State s0 = Acas(2000, 0.0, kPi, 1100, 1100);
  const RolloutResult r = Rollout(env, policy, s0, 100, 1);
  ASSERT_TRUE(r.crashed());
  EXPECT_EQ(*r.crash_step, 1);
  EXPECT_EQ(r.length(), 2);
  EXPECT_LT(r.states[1][kAcasRho], 500.0);
  // Only the pre-crash step earns reward.
  EXPECT_DOUBLE_EQ(r.cumulative_reward, 2000.0 / 5000.0 - 0.02);
}

TEST(AcasToy, SpeedsAreConservedAlongRollouts) {
  AcasToyEnvironment env;
  AcasScriptedPolicy policy;
  RandomStream rng(3);
  for (int i = 0; i < 50; ++i) {
    const State s0 = env.Sample(rng);
    const RolloutResult r = Rollout(env, policy, s0, 100, 0);
    for (const State& s : r.states) {
      ASSERT_EQ(s[kAcasVOwn], s0[kAcasVOwn]);
      ASSERT_EQ(s[kAcasVInt], s0[kAcasVInt]);
    }
  }
}

TEST(AcasToy, WrapAngleRange) {
  EXPECT_DOUBLE_EQ(WrapAngle(kPi), kPi);
  EXPECT_DOUBLE_EQ(WrapAngle(-kPi), kPi);
  EXPECT_NEAR(WrapAngle(3 * kPi / 2), -kPi / 2, 1e-12);
}

TEST(Environments, SamplersPassTheirValidators) {
  for (const std::string& name : BuiltinEnvironmentNames()) {
    const EnvironmentBundle b = MakeEnvironment(name);
    RandomStream rng(99);
    int failures = 0;
    for (int i = 0; i < 1000; ++i) failures += b.env->Validate(b.env->Sample(rng)) ? 0 : 1;
    EXPECT_EQ(failures, 0) << name;
  }
}

State CoopNav(std::initializer_list<double> v) {
  State s(12);
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

TEST(CoopNavToy, AgentsOnLandmarksStayPut) {
  CoopNavEnvironment env;
  CoopNavGreedyPolicy policy;
  const State s0 = CoopNav({-1, -1, 1, -1, 0, 1.5, -1, -1, 1, -1, 0, 1.5});
  const RolloutResult r = Rollout(env, policy, s0, 20, 0);
  EXPECT_FALSE(r.crashed());
  EXPECT_EQ(r.length(), 20);
  EXPECT_EQ(r.cumulative_reward, 0.0);
  for (const State& s : r.states) EXPECT_EQ(s, s0);
}

TEST(CoopNavToy, SymmetricAgentsMeetOnSharedLandmark) {
  // Two coincident landmarks at the origin pull agents 0 and 1 together;
  // agent 2 already sits on landmark 2.
  CoopNavEnvironment env;
  CoopNavGreedyPolicy policy;
  const double sep = 1.94;
  const State s0 = CoopNav({-sep / 2, 0, sep / 2, 0, -1.8, 1.8, 0, 0, 0, 0, -1.8, 1.8});
  ASSERT_TRUE(env.Validate(s0));
  const auto& c = env.constants();
  const int bound =
      static_cast<int>(std::ceil((sep - 2 * c.radius) / (2 * c.speed_cap * c.dt)));
  const RolloutResult r = Rollout(env, policy, s0, 100, 0);
  ASSERT_TRUE(r.crashed());
  EXPECT_LE(*r.crash_step, bound);
  EXPECT_GE(*r.crash_step, bound - 1);
}

TEST(CoopNavToy, ValidatorRejectsTouchingStarts) {
  CoopNavEnvironment env;
  const double r2 = 2 * env.constants().radius;
  EXPECT_FALSE(env.Validate(CoopNav({0, 0, r2, 0, 1, 1, 0, 0, 1, 1, -1, -1})));
  EXPECT_FALSE(env.Validate(CoopNav({0, 0, r2 * 0.5, 0, 1, 1, 0, 0, 1, 1, -1, -1})));
  EXPECT_TRUE(env.Validate(CoopNav({0, 0, r2 * 1.01, 0, 1, 1, 0, 0, 1, 1, -1, -1})));
}

TEST(CoopNavToy, RewardIsNonPositiveAndZeroOnlyWhenCovered) {
  CoopNavEnvironment env;
  CoopNavGreedyPolicy policy;
  RandomStream rng(4);
  for (int i = 0; i < 200; ++i) {
    const State s = env.Sample(rng);
    const double r = env.Reward(s, policy.Act(s));
    EXPECT_LE(r, 0.0);
    EXPECT_LT(r, 0.0);  // continuous sample never covers all landmarks
  }
  const State covered = CoopNav({1, 1, -1, 1, 0, 0, 0, 0, -1, 1, 1, 1});
  EXPECT_EQ(env.Reward(covered, policy.Act(covered)), 0.0);
}

TEST(Chain, ZeroDynamicsFixedPoint) {
  ChainConstants c = ChainConstants::Default(2);
  c.a = Eigen::Matrix2d::Zero();
  c.b = Eigen::Vector2d::Zero();
  c.sigma = 0.0;
  ChainEnvironment env(c);
  NullPolicy policy;
  const RolloutResult r = Rollout(env, policy, Eigen::Vector2d::Zero(), 3, 0);
  ASSERT_EQ(r.length(), 3);
  for (const State& s : r.states) EXPECT_EQ(s, Eigen::Vector2d::Zero());
  EXPECT_EQ(r.cumulative_reward, 0.0);
  EXPECT_FALSE(r.crashed());
}

TEST(Chain, ExactDensityTrivialCases) {
  const Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  const Eigen::Vector2d b = Eigen::Vector2d::Zero();
  const double log_n0 = -std::log(2 * kPi);  // log N(0 | 0, I) in 2-d
  EXPECT_NEAR(ChainExactLogDensity({b, b}, a, b, 1.0), 2 * log_n0, 1e-12);
  EXPECT_NEAR(ChainExactLogDensity({b}, a, b, 1.0), log_n0, 1e-12);
}

TEST(Chain, ExactDensityMatchesTermwiseOracle) {
  const ChainConstants c = ChainConstants::Default(2);
  ChainEnvironment env(c);
  NullPolicy policy;
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd mean = (ident - c.a).inverse() * c.b;
  const Eigen::MatrixXd cov = oracle::StationaryCovarianceByIteration(c.a, c.sigma);
  RandomStream rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    StateSequence seq = {Eigen::Vector2d(rng.Uniform(-1, 1), rng.Uniform(-1, 1))};
    for (int t = 1; t < 10; ++t) {
      seq.push_back(c.a * seq.back() + c.b +
                    c.sigma * Eigen::Vector2d(rng.Normal(), rng.Normal()));
    }
    const long double expected = oracle::ChainLogDensity(seq, c.a, c.b, c.sigma, mean, cov);
    const double got = ChainExactLogDensity(seq, c.a, c.b, c.sigma);
    EXPECT_LT(std::fabs((got - expected) / expected), 1e-10);
  }
}

TEST(Chain, LyapunovMatchesFixedPointIteration) {
  Eigen::Matrix3d a;
  a << 0.5, 0.2, 0.0, -0.1, 0.7, 0.1, 0.05, 0.0, 0.6;
  const Eigen::MatrixXd p = SolveDiscreteLyapunov(a, 0.04 * Eigen::Matrix3d::Identity());
  const Eigen::MatrixXd q = oracle::StationaryCovarianceByIteration(a, 0.2);
  EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Chain, EmpiricalStationaryCovarianceWithinTenPercent) {
  ChainConstants c = ChainConstants::Default(2);
  c.crash_threshold = 1e9;
  c.horizon = 200000;
  ChainEnvironment env(c);
  NullPolicy policy;
  const RolloutResult r = Rollout(env, policy, Eigen::Vector2d::Zero(), c.horizon, 17);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  const int burn = 1000;
  const int n = r.length() - burn;
  for (int t = burn; t < r.length(); ++t) mean += r.states[t];
  mean /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (int t = burn; t < r.length(); ++t) {
    const Eigen::Vector2d z = r.states[t] - mean;
    cov += z * z.transpose();
  }
  cov /= n;
  const Eigen::MatrixXd p = SolveDiscreteLyapunov(c.a, c.sigma * c.sigma * Eigen::Matrix2d::Identity());
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(cov(i, i) / p(i, i), 1.0, 0.1);
  EXPECT_LT(std::fabs(cov(0, 1) - p(0, 1)), 0.1 * std::sqrt(p(0, 0) * p(1, 1)));
}

TEST(Chain, RejectsUnstableDynamics) {
  ChainConstants c = ChainConstants::Default(2);
  c.a = 1.2 * Eigen::Matrix2d::Identity();
  EXPECT_THROW(ChainEnvironment env(c), Error);
}

TEST(Registry, ResolvesConstantsAndRejectsUnknowns) {
  const EnvironmentBundle b = MakeEnvironment("acas-toy", {{"rho_crash", 600.0}});
  EXPECT_EQ(b.constants["rho_crash"], 600.0);
  EXPECT_TRUE(b.env->Crashed(Acas(550, 0, 0, 500, 500)));
  try {
    MakeEnvironment("acas-toy", {{"no_such_key", 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
  EXPECT_THROW(MakeEnvironment("pong"), Error);
  EXPECT_TRUE(IsBuiltinEnvironment("chain"));
  EXPECT_FALSE(IsBuiltinEnvironment("bridge"));
}

}  // namespace
}  // namespace mdpfuzz::envs
