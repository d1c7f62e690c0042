#include "socnav/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

namespace socnav {
namespace {

constexpr double kDt = 0.1;
const Limits kLimits{};

Eigen::Vector4d unclamped_rk4(const AgentState& x, const AgentControl& u, double dt) {
  return oracle::rk4_unicycle(x.vector(), u.omega, u.a, dt, 1000);
}

TEST(Step, StraightLineConstantSpeed) {
  const AgentState next = step({0, 0, 0, 1}, {0, 0}, kDt, kLimits);
  EXPECT_NEAR(next.x, 0.1, 1e-15);
  EXPECT_EQ(next.y, 0.0);
  EXPECT_EQ(next.theta, 0.0);
  EXPECT_EQ(next.v, 1.0);
}

TEST(Step, PureAcceleration) {
  const AgentState next = step({0, 0, 0, 0}, {0, 1.5}, kDt, kLimits);
  EXPECT_NEAR(next.x, 0.0075, 1e-15);
  EXPECT_EQ(next.y, 0.0);
  EXPECT_NEAR(next.v, 0.15, 1e-15);
}

TEST(Step, MatchesFineStepIntegration) {
  const AgentState x0{0, 0, std::numbers::pi / 4, 1};
  const AgentControl u{1.0, 0.5};
  const Eigen::Vector4d expected = unclamped_rk4(x0, u, kDt);
  const Eigen::Vector4d got = step(x0, u, kDt, kLimits).vector();
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(got[i], expected[i], 1e-8) << "component " << i;
}

TEST(Step, SmallTurnRateIsContinuous) {
  const AgentState x0{1.0, -2.0, 0.7, 1.2};
  const AgentState with_turn = step(x0, {1e-12, 0.8}, kDt, kLimits);
  const AgentState without = step(x0, {0.0, 0.8}, kDt, kLimits);
  EXPECT_NEAR(with_turn.x, without.x, 1e-9);
  EXPECT_NEAR(with_turn.y, without.y, 1e-9);
  EXPECT_NEAR(with_turn.theta, without.theta, 1e-9);
  EXPECT_NEAR(with_turn.v, without.v, 1e-9);
}

TEST(Step, AccurateAcrossSeriesThreshold) {
  // Turn rates on either side of the series/closed-form switch.
  const AgentState x0{0.3, 0.1, -1.1, 1.4};
  for (double omega : {1e-7, 1e-5, 1e-3, 0.49, 0.5, 0.51, 0.9}) {
    const AgentControl u{omega, -0.7};
    const Eigen::Vector4d expected = unclamped_rk4(x0, u, kDt);
    const Eigen::Vector4d got = step(x0, u, kDt, kLimits).vector();
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], expected[i], 1e-10) << "omega " << omega;
  }
}

TEST(Step, ClampsSpeed) {
  EXPECT_EQ(step({0, 0, 0, 1.5}, {0, 1.5}, kDt, kLimits).v, 1.5);
  EXPECT_EQ(step({0, 0, 0, 0.0}, {0, -1.5}, kDt, kLimits).v, 0.0);
}

TEST(Step, RejectsNonFiniteInput) {
  EXPECT_THROW(step({NAN, 0, 0, 1}, {0, 0}, kDt, kLimits), DomainError);
  EXPECT_THROW(step({0, 0, 0, 1}, {INFINITY, 0}, kDt, kLimits), DomainError);
  EXPECT_THROW(step({0, 0, 0, 1}, {0, 0}, 0.0, kLimits), DomainError);
}

TEST(Linearize, StraightLineEntries) {
  const Linearization lin = linearize({0, 0, 0, 1}, {0, 0}, kDt);
  EXPECT_NEAR(lin.A(0, 3), 0.1, 1e-15);
  const Linearization rest = linearize({0, 0, 0, 0}, {0, 0}, kDt);
  EXPECT_NEAR(rest.B(3, 1), 0.1, 1e-15);
}

TEST(Linearize, AffineModelReproducesStepAtExpansionPoint) {
  const AgentState x0{2.0, 1.0, 0.4, 0.9};
  const AgentControl u{-0.6, 0.3};
  const Linearization lin = linearize(x0, u, kDt);
  const Eigen::Vector4d affine = lin.A * x0.vector() + lin.B * u.vector() + lin.c;
  EXPECT_LT((affine - step(x0, u, kDt, kLimits).vector()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Linearize, MatchesCentralDifferencesOnRandomSamples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-10, 10), ang(-std::numbers::pi, std::numbers::pi), om(-1, 1),
      acc(-1.5, 1.5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = acc(rng);
    // Keep v + a dt inside the speed bounds so the clamp is inactive around the sample.
    const double v_lo = std::max(0.0, -a * kDt) + 1e-3;
    const double v_hi = std::min(1.5, 1.5 - a * kDt) - 1e-3;
    const double v = std::uniform_real_distribution<double>(v_lo, v_hi)(rng);
    const AgentState x0{pos(rng), pos(rng), ang(rng), v};
    const AgentControl u{om(rng), a};
    const Linearization lin = linearize(x0, u, kDt);
    Eigen::VectorXd point(6);
    point << x0.vector(), u.vector();
    const auto map = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
      return step({p[0], p[1], p[2], p[3]}, {p[4], p[5]}, kDt, kLimits).vector();
    };
    const Eigen::MatrixXd fd = oracle::central_difference(map, point, 1e-5);
    worst = std::max(worst, (fd.leftCols(4) - lin.A).cwiseAbs().maxCoeff());
    worst = std::max(worst, (fd.rightCols(2) - lin.B).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Rollout, ZeroControlsTravelStraight) {
  const std::vector<AgentControl> controls(25);
  const Trajectory traj = rollout({0, 0, 0, 1}, controls, kDt, kLimits);
  EXPECT_NEAR(traj.states.back().x, 2.5, 1e-12);
  EXPECT_NEAR(traj.states.back().y, 0.0, 1e-12);
}

TEST(Rollout, SingleControlShape) {
  const std::vector<AgentControl> controls(1);
  const Trajectory traj = rollout({0, 0, 0, 1}, controls, kDt, kLimits);
  EXPECT_EQ(traj.states.size(), 2u);
  EXPECT_EQ(traj.controls.size(), 1u);
  EXPECT_TRUE(traj.well_formed());
}

TEST(Rollout, StatesFollowStep) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> om(-1, 1), acc(-1.5, 1.5);
  std::vector<AgentControl> controls;
  for (int i = 0; i < 40; ++i) controls.push_back({om(rng), acc(rng)});
  const Trajectory traj = rollout({1, 2, 0.3, 0.5}, controls, kDt, kLimits);
  for (std::size_t t = 0; t < controls.size(); ++t) {
    EXPECT_EQ(traj.states[t + 1], step(traj.states[t], controls[t], kDt, kLimits));
    EXPECT_TRUE(kLimits.speed.contains(traj.states[t + 1].v));
  }
}

TEST(Rollout, RejectsEmptyControls) {
  EXPECT_THROW(rollout({0, 0, 0, 1}, std::vector<AgentControl>{}, kDt, kLimits), std::invalid_argument);
}

TEST(Limits, ValidateAndClamp) {
  EXPECT_NO_THROW(kLimits.validate());
  Limits bad;
  bad.speed = {-0.1, 1.0};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  const AgentControl c = kLimits.clamp({5.0, -9.0});
  EXPECT_EQ(c.omega, 1.0);
  EXPECT_EQ(c.a, -1.5);
}

}  // namespace
}  // namespace socnav
