#include "socnav/planner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace socnav {
namespace {

Trajectory straight_line(const AgentState& start, int controls, double dt) {
  return rollout(start, std::vector<AgentControl>(static_cast<std::size_t>(controls)), dt, Limits{});
}

// Term-by-term re-summation with explicit trigonometry.
double convenience_oracle(const Trajectory& traj, const Vec2& goal, const Eigen::Vector3d& w) {
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    const AgentState& a = traj.states[t];
    const AgentState& b = traj.states[t + 1];
    total += w[0] * (std::pow(b.x - a.x, 2) + std::pow(b.y - a.y, 2));
    total += w[1] * (std::pow(b.v * std::cos(b.theta) - a.v * std::cos(a.theta), 2) +
                     std::pow(b.v * std::sin(b.theta) - a.v * std::sin(a.theta), 2));
  }
  const AgentState& end = traj.states.back();
  total += w[2] * (std::pow(end.x - goal.x(), 2) + std::pow(end.y - goal.y(), 2));
  return total;
}

double path_irregularity_oracle(const Trajectory& traj, const Vec2& goal) {
  double total = 0.0;
  for (const AgentState& s : traj.states) {
    const double vx = s.v * std::cos(s.theta), vy = s.v * std::sin(s.theta);
    const double dx = goal.x() - s.x, dy = goal.y() - s.y;
    const double nv = std::hypot(vx, vy), nd = std::hypot(dx, dy);
    if (nv < 1e-6 || nd < 1e-6) continue;
    total += std::acos(std::clamp((vx * dx + vy * dy) / (nv * nd), -1.0, 1.0));
  }
  return total;
}

double max_state_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  for (std::size_t t = 0; t < a.states.size(); ++t) {
    gap = std::max(gap, (a.states[t].vector() - b.states[t].vector()).cwiseAbs().maxCoeff());
  }
  return gap;
}

IdealSolution ideal_with_value(const Trajectory& traj, const Vec2& goal, const PlannerConfig& cfg) {
  IdealSolution ideal;
  ideal.trajectory = traj;
  ideal.convenience = convenience(traj, goal, cfg.convenience_weights);
  return ideal;
}

TEST(Convenience, StationaryAtGoalIsZero) {
  const Trajectory traj = straight_line({3, 4, 0.2, 0}, 25, 0.1);
  EXPECT_EQ(convenience(traj, {3, 4}, {1, 1, 1}), 0.0);
}

TEST(Convenience, StraightLineClosedForm) {
  const Trajectory traj = straight_line({0, 0, 0, 1}, 25, 0.1);
  const Vec2 goal = traj.states.back().position();
  EXPECT_NEAR(convenience(traj, goal, {1, 1, 1}), 25 * 0.01, 1e-12);
  EXPECT_NEAR(convenience(traj, goal, {2, 1, 1}), 2 * 25 * 0.01, 1e-12);
}

TEST(Convenience, MatchesReSummationOnRandomTrajectories) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> om(-1, 1), acc(-1.5, 1.5), w(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<AgentControl> controls;
    for (int t = 0; t < 26; ++t) controls.push_back({om(rng), acc(rng)});
    const Trajectory traj = rollout({1, -1, 0.4, 0.8}, controls, 0.1, Limits{});
    const Eigen::Vector3d weights(w(rng), w(rng), w(rng));
    const Vec2 goal(7, 2);
    EXPECT_NEAR(convenience(traj, goal, weights), convenience_oracle(traj, goal, weights), 1e-10);
  }
}

TEST(Inconvenience, IdealIsExactlyZero) {
  PlannerConfig cfg;
  const IdealSolution ideal = solve_ideal({0, 0, 0, 1}, {10, 0}, {}, cfg);
  EXPECT_EQ(inconvenience(ideal.trajectory, ideal, {10, 0}, cfg.convenience_weights, cfg.convenience_floor), 0.0);
}

TEST(Inconvenience, TwentyPercentWorseIsPointTwo) {
  const Trajectory traj = straight_line({0, 0, 0, 1}, 25, 0.1);
  const Vec2 goal(2.5, 0);
  IdealSolution ideal;
  ideal.trajectory = traj;
  ideal.convenience = convenience(traj, goal, {1, 1, 1}) / 1.2;
  EXPECT_NEAR(inconvenience(traj, ideal, goal, {1, 1, 1}, 1e-3), 0.2, 1e-12);
}

TEST(Inconvenience, FloorGuardsDegenerateIdeal) {
  const Trajectory parked = straight_line({1, 1, 0, 0}, 25, 0.1);
  const IdealSolution ideal = ideal_with_value(parked, {1, 1}, PlannerConfig{});
  ASSERT_EQ(ideal.convenience, 0.0);
  const Trajectory moving = straight_line({1, 1, 0, 0.5}, 25, 0.1);
  const double value = inconvenience(moving, ideal, {1, 1}, {1, 1, 1}, 1e-3);
  EXPECT_TRUE(std::isfinite(value));
  EXPECT_NEAR(value, convenience(moving, {1, 1}, {1, 1, 1}) / 1e-3, 1e-9);
}

class FollowerProgramTest : public ::testing::Test {
 protected:
  void SetUp() override {
    scene.start = {0, 0, 0, 1};
    scene.goal = {10, 0};
    ideal = solve_ideal(scene.start, scene.goal, {}, cfg);
    scene.leader = constant_velocity_rollout({6, 0.2, std::numbers::pi, 1}, 26, cfg.dt, cfg.limits);
  }

  FollowerProgram build(const PlannerConfig& c) {
    const std::vector<double> slacks(27, 0.0);
    return build_follower_program(scene, ideal, {ideal.trajectory, slacks}, c);
  }

  PlannerConfig cfg;
  InteractionScene scene;
  IdealSolution ideal;
};

TEST_F(FollowerProgramTest, LayoutSize) {
  const FollowerProgram fp = build(cfg);
  EXPECT_EQ(fp.layout.size(), 4 * 27 + 2 * 26 + 27);
  EXPECT_EQ(fp.program.num_variables(), fp.layout.size());
  EXPECT_EQ(fp.program.variable_names.size(), static_cast<std::size_t>(fp.layout.size()));
  EXPECT_EQ(fp.program.quadratic.size(), 1u);
}

TEST_F(FollowerProgramTest, UnitMarkupGivesUniformStageWeights) {
  PlannerConfig c = cfg;
  c.markup = 1.0;
  c.trust_weight = 0.0;
  const FollowerProgram fp = build(c);
  const double first = fp.program.P.coeff(fp.layout.control(0, 0), fp.layout.control(0, 0));
  for (int t = 1; t <= c.horizon; ++t) {
    EXPECT_EQ(fp.program.P.coeff(fp.layout.control(t, 0), fp.layout.control(t, 0)), first);
    EXPECT_EQ(fp.program.P.coeff(fp.layout.state(t, 0), fp.layout.state(t, 0)),
              fp.program.P.coeff(fp.layout.state(0, 0), fp.layout.state(0, 0)));
  }
}

TEST_F(FollowerProgramTest, MarkupGrowsGeometrically) {
  PlannerConfig c = cfg;
  c.trust_weight = 0.0;
  const FollowerProgram fp = build(c);
  const double first = fp.program.P.coeff(fp.layout.control(0, 1), fp.layout.control(0, 1));
  const double last = fp.program.P.coeff(fp.layout.control(25, 1), fp.layout.control(25, 1));
  EXPECT_NEAR(last / first, std::pow(1.05, 25), 1e-12);
}

TEST_F(FollowerProgramTest, DiscountedSlackWeightAtHorizon) {
  const FollowerProgram fp = build(cfg);
  // 1/2 z'Pz convention: P holds twice the weight.
  const double w25 = 0.5 * fp.program.P.coeff(fp.layout.slack(25), fp.layout.slack(25));
  EXPECT_NEAR(w25, 90.5, 0.05);
  EXPECT_NEAR(w25, 150.0 * std::pow(0.98, 25), 1e-9);
  EXPECT_NEAR(0.5 * fp.program.P.coeff(fp.layout.slack(0), fp.layout.slack(0)), 150.0, 1e-12);
}

TEST_F(FollowerProgramTest, OptimalControlSlackWeight) {
  const FollowerProgram fp = build(PlannerConfig::optimal_control());
  EXPECT_NEAR(0.5 * fp.program.P.coeff(fp.layout.slack(0), fp.layout.slack(0)), 1000.0, 1e-12);
  EXPECT_TRUE(fp.program.quadratic.empty());
}

TEST_F(FollowerProgramTest, CoincidentPositionsUseFixedNormalAndFlag) {
  scene.leader = ideal.trajectory;
  const FollowerProgram fp = build(cfg);
  EXPECT_TRUE(fp.degenerate_linearization);
  EXPECT_TRUE(Eigen::MatrixXd(fp.program.G).allFinite());
  EXPECT_FALSE(build_follower_program(InteractionScene{scene.start, scene.goal, std::nullopt, {}, {}}, ideal,
                                      {ideal.trajectory, std::vector<double>(27, 0.0)}, cfg)
                   .degenerate_linearization);
}

TEST_F(FollowerProgramTest, LinearizedBudgetIsOneExtraInequality) {
  PlannerConfig c = cfg;
  c.linearize_budget = true;
  const FollowerProgram native = build(cfg);
  const FollowerProgram tangent = build(c);
  EXPECT_TRUE(tangent.program.quadratic.empty());
  EXPECT_EQ(tangent.program.G.rows(), native.program.G.rows() + 1);
}

TEST_F(FollowerProgramTest, DumpIsSelfDescribing) {
  std::ostringstream out;
  dump(build(cfg).program, out);
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_EQ(doc["variable_names"][0], "x[0]");
  EXPECT_EQ(doc["quadratic"][0]["label"], "inconvenience_budget");
}

TEST_F(FollowerProgramTest, WrongLeaderLengthThrows) {
  scene.leader->states.pop_back();
  EXPECT_THROW(build(cfg), std::invalid_argument);
}

TEST(SolveIdeal, StraightLineToGoal) {
  PlannerConfig cfg;
  const IdealSolution ideal = solve_ideal({0, 0, 0, 1}, {10, 0}, {}, cfg);
  EXPECT_TRUE(ideal.converged);
  EXPECT_LT(path_irregularity_oracle(ideal.trajectory, {10, 0}), 0.05);
  EXPECT_NEAR(ideal.trajectory.states.back().v, 1.5, 1e-3);
  EXPECT_NEAR(ideal.convenience, convenience_oracle(ideal.trajectory, {10, 0}, cfg.convenience_weights), 1e-9);
  EXPECT_TRUE(ideal.trajectory.well_formed());
  EXPECT_EQ(ideal.trajectory.states.size(), 27u);
}

TEST(SolveIdeal, StartAtGoalIsFixedPoint) {
  PlannerConfig cfg;
  const IdealSolution ideal = solve_ideal({2, 3, 0.5, 0}, {2, 3}, {}, cfg);
  EXPECT_LT(max_state_gap(ideal.trajectory, straight_line({2, 3, 0.5, 0}, 26, 0.1)), 1e-6);
  double effort = 0.0;
  for (const AgentControl& u : ideal.trajectory.controls) effort += u.vector().squaredNorm();
  EXPECT_LT(effort, 1e-10);
}

TEST(SolveIdeal, IsReproducibleAndHistoryFree) {
  PlannerConfig cfg;
  const IdealSolution a = solve_ideal({0, 0, 0.3, 0.5}, {5, 5}, {}, cfg);
  solve_ideal({9, 9, 2.0, 1.5}, {0, 0}, {}, cfg);
  const IdealSolution b = solve_ideal({0, 0, 0.3, 0.5}, {5, 5}, {}, cfg);
  EXPECT_EQ(a.trajectory.states, b.trajectory.states);
}

TEST(SolveIdeal, RespectsWalls) {
  PlannerConfig cfg;
  // Goal lies beyond the wall y <= 0.5, i.e. -y >= -0.5.
  const std::vector<Wall> walls{{Vec2(0, -1), -0.5}};
  const IdealSolution ideal = solve_ideal({0, 0, 0, 1}, {3, 3}, walls, cfg);
  for (std::size_t t = 1; t < ideal.trajectory.states.size(); ++t) {
    EXPECT_GE(walls[0].signed_distance(ideal.trajectory.position(t)), -2e-3) << "t = " << t;
  }
}

TEST(SolveIdeal, RejectsNonFiniteInput) {
  EXPECT_THROW(solve_ideal({NAN, 0, 0, 1}, {1, 0}, {}, PlannerConfig{}), DomainError);
}

// Exhaustive search over a 5 x 5 control grid for a T = 3 instance.
TEST(SolveIdeal, WithinFivePercentOfControlGridOptimum) {
  PlannerConfig cfg;
  cfg.horizon = 3;
  cfg.markup = 1.0;
  const AgentState start{0, 0, 0.2, 0.6};
  const std::vector<std::pair<Vec2, double>> cases = {{{1.0, 0.6}, 0.0}, {{0.2, -0.8}, 0.0}, {{-0.5, 0.3}, 0.0}};
  const std::array<double, 5> omegas{-1.0, -0.5, 0.0, 0.5, 1.0};
  const std::array<double, 5> accels{-1.5, -0.75, 0.0, 0.75, 1.5};
  for (const auto& [goal, unused] : cases) {
    auto cost = [&](const std::vector<AgentControl>& u) {
      std::vector<AgentState> xs{start};
      for (const AgentControl& c : u) xs.push_back(step(xs.back(), c, cfg.dt, cfg.limits));
      double total = 0.0;
      for (std::size_t t = 0; t < u.size(); ++t) {
        total += u[t].omega * u[t].omega + u[t].a * u[t].a +
                 cfg.cost.goal_running * (xs[t].position() - goal).squaredNorm();
      }
      return total + cfg.cost.goal_terminal * (xs.back().position() - goal).squaredNorm();
    };
    double grid_best = std::numeric_limits<double>::infinity();
    std::vector<AgentControl> u(4);
    for (int code = 0; code < 390625; ++code) {
      int c = code;
      for (int t = 0; t < 4; ++t) {
        u[t] = {omegas[c % 5], accels[(c / 5) % 5]};
        c /= 25;
      }
      grid_best = std::min(grid_best, cost(u));
    }
    const IdealSolution ideal = solve_ideal(start, goal, {}, cfg);
    const double scp = cost(ideal.trajectory.controls);
    EXPECT_LE(scp, 1.05 * grid_best) << "goal " << goal.transpose();
  }
}

TEST(BestResponse, AloneReducesToIdeal) {
  PlannerConfig cfg;
  cfg.markup = 1.0;
  InteractionScene scene;
  scene.start = {0, 0, 0, 1};
  scene.goal = {10, 0};
  const IdealSolution ideal = solve_ideal(scene.start, scene.goal, {}, cfg);
  const PlanResult plan = best_response(scene, ideal, cfg);
  EXPECT_LT(max_state_gap(plan.trajectory, ideal.trajectory), 1e-4);
  EXPECT_NEAR(plan.inconvenience, 0.0, 1e-6);
  EXPECT_FALSE(plan.subproblem_failed);
}

TEST(BestResponse, FarLeaderDecouples) {
  PlannerConfig cfg;
  cfg.markup = 1.0;
  InteractionScene scene;
  scene.start = {0, 0, 0, 1};
  scene.goal = {10, 0};
  scene.leader = constant_velocity_rollout({110, 0, std::numbers::pi, 1}, 26, cfg.dt, cfg.limits);
  const IdealSolution ideal = solve_ideal(scene.start, scene.goal, {}, cfg);
  const PlanResult plan = best_response(scene, ideal, cfg);
  EXPECT_LT(max_state_gap(plan.trajectory, ideal.trajectory), 1e-4);
  EXPECT_EQ(plan.slack_sum(), 0.0);
}

class HeadOnResponse : public ::testing::Test {
 protected:
  void SetUp() override {
    scene.start = {0, 0, 0, 1};
    scene.goal = {10, 0};
    scene.leader = constant_velocity_rollout({4, 0.1, std::numbers::pi, 1}, 26, cfg.dt, cfg.limits);
    ideal = solve_ideal(scene.start, scene.goal, {}, cfg);
  }

  PlannerConfig cfg;
  InteractionScene scene;
  IdealSolution ideal;
};

TEST_F(HeadOnResponse, ClearanceAndBudgetHoldOnOutput) {
  const PlanResult plan = best_response(scene, ideal, cfg);
  ASSERT_FALSE(plan.subproblem_failed);
  EXPECT_LE(plan.inconvenience, cfg.budget + 1e-3);
  EXPECT_NEAR(plan.inconvenience,
              inconvenience(plan.trajectory, ideal, scene.goal, cfg.convenience_weights, cfg.convenience_floor),
              1e-12);
  double squared = 0.0;
  for (std::size_t t = 0; t < plan.trajectory.states.size(); ++t) {
    const double dist = (plan.trajectory.position(t) - scene.leader->position(t)).norm();
    EXPECT_GE(plan.slacks[t], 0.0);
    EXPECT_GE(dist, cfg.collision_radius - plan.slacks[t] - 1e-9) << "t = " << t;
    squared += plan.slacks[t] * plan.slacks[t];
  }
  EXPECT_LT(squared, 0.5);
  // The follower must leave the straight line to reduce overlap.
  double lateral = 0.0;
  for (const AgentState& s : plan.trajectory.states) lateral = std::max(lateral, std::abs(s.y));
  EXPECT_GT(lateral, 0.2);
}

TEST_F(HeadOnResponse, ExecutedTrajectoryIsDynamicallyConsistent) {
  const PlanResult plan = best_response(scene, ideal, cfg);
  const Trajectory replay = rollout(scene.start, plan.trajectory.controls, cfg.dt, cfg.limits);
  EXPECT_EQ(replay.states, plan.trajectory.states);
  for (const AgentControl& u : plan.trajectory.controls) EXPECT_TRUE(cfg.limits.contains(u));
}

TEST_F(HeadOnResponse, ObjectiveHistoryIsNonIncreasing) {
  const PlanResult plan = best_response(scene, ideal, cfg);
  ASSERT_GE(plan.objective_history.size(), 2u);
  for (std::size_t k = 1; k < plan.objective_history.size(); ++k) {
    EXPECT_LE(plan.objective_history[k], plan.objective_history[k - 1] + 1e-8);
  }
  EXPECT_NEAR(plan.objective_history.back(), follower_objective(scene, plan.trajectory, cfg), 1e-9);
}

TEST_F(HeadOnResponse, TighterBudgetIsRespected) {
  for (double budget : {0.05, 0.1, 0.4}) {
    PlannerConfig c = cfg;
    c.budget = budget;
    EXPECT_LE(best_response(scene, ideal, c).inconvenience, budget + 1e-3) << "budget " << budget;
  }
}

TEST_F(HeadOnResponse, LinearizedBudgetFallbackStillHoldsBudget) {
  PlannerConfig c = cfg;
  c.linearize_budget = true;
  EXPECT_LE(best_response(scene, ideal, c).inconvenience, c.budget + 1e-3);
}

TEST_F(HeadOnResponse, TrustWeightPinsToInitialization) {
  double previous = std::numeric_limits<double>::infinity();
  for (double beta : {10.0, 100.0, 1e3, 1e4, 1e5}) {
    PlannerConfig c = cfg;
    c.trust_weight = beta;
    c.scp_iterations = 2;
    c.merit_tolerance = 0.0;
    const PlanResult plan = best_response(scene, ideal, c);
    const double change = max_state_gap(plan.trajectory, ideal.trajectory);
    EXPECT_LE(change, previous + 1e-12) << "beta " << beta;
    previous = change;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST_F(HeadOnResponse, PeripheralsAreAvoided) {
  scene.leader.reset();
  scene.peripherals.push_back({Vec2(2.5, 0.05), Vec2(0, 0)});
  const PlanResult plan = best_response(scene, ideal, cfg);
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < plan.trajectory.states.size(); ++t) {
    closest = std::min(closest, (plan.trajectory.position(t) - Vec2(2.5, 0.05)).norm());
  }
  EXPECT_GT(closest, 0.8);
}

IbrProblem headon_problem(double separation) {
  IbrProblem p;
  p.robot_state = {0, 0, 0, 1};
  p.robot_goal = {10, 0};
  p.human_state = {separation, 0, std::numbers::pi, 1};
  p.human_goal = {separation - 10, 0};
  return p;
}

// Rotation by pi about m.
AgentState rotate_half_turn(const AgentState& s, const Vec2& m) {
  return {2 * m.x() - s.x, 2 * m.y() - s.y, s.theta + std::numbers::pi, s.v};
}

TEST(IbrPlan, FarHumanLeavesRobotOnIdeal) {
  IbrProblem p = headon_problem(110);
  p.robot_config.markup = 1.0;
  p.human_model_config.markup = 1.0;
  const IbrResult r = ibr_plan(p);
  EXPECT_LT(max_state_gap(r.robot.trajectory, r.robot_ideal.trajectory), 1e-4);
}

// Rotating the scene by pi about the midpoint swaps the start poses of robot and human;
// the robot plan must rotate with it.
TEST(IbrPlan, RoleSwapIsPointSymmetric) {
  IbrProblem p = headon_problem(4);
  p.human_state.y = 0.05;
  p.human_goal.y() = 0.05;
  const Vec2 m(2.0, 0.025);
  IbrProblem swapped = p;
  swapped.robot_state = rotate_half_turn(p.robot_state, m);
  swapped.human_state = rotate_half_turn(p.human_state, m);
  swapped.robot_goal = 2 * m - p.robot_goal;
  swapped.human_goal = 2 * m - p.human_goal;
  ASSERT_LT((swapped.robot_state.position() - p.human_state.position()).norm(), 1e-12);
  ASSERT_LT((swapped.human_state.position() - p.robot_state.position()).norm(), 1e-12);
  ASSERT_LT((swapped.robot_goal - p.human_goal).norm(), 1e-12);

  const IbrResult forward = ibr_plan(p);
  const IbrResult turned = ibr_plan(swapped);
  for (std::size_t t = 0; t < forward.robot.trajectory.states.size(); ++t) {
    const Vec2 expected = 2 * m - forward.robot.trajectory.position(t);
    EXPECT_LT((turned.robot.trajectory.position(t) - expected).norm(), 1e-3) << "t = " << t;
  }
}

TEST(IbrPlan, HeadOnKeepsJointClearance) {
  IbrProblem p = headon_problem(4);
  p.human_state.theta += 0.02;
  const IbrResult r = ibr_plan(p);
  EXPECT_LE(r.robot.inconvenience, p.robot_config.budget + 1e-3);
  EXPECT_LE(r.human.inconvenience, p.human_model_config.budget + 1e-3);
  for (std::size_t t = 0; t < r.robot.trajectory.states.size(); ++t) {
    const double dist = (r.robot.trajectory.position(t) - r.human.trajectory.position(t)).norm();
    EXPECT_GE(dist, p.robot_config.collision_radius - r.robot.slacks[t] - 1e-3) << "t = " << t;
  }
}

TEST(IbrPlan, ZeroIterationsAnswersConstantVelocityPrediction) {
  IbrProblem p = headon_problem(4);
  p.robot_config = PlannerConfig::optimal_control();
  p.human_model_config = PlannerConfig::optimal_control();
  const IbrResult r = ibr_plan(p);
  const Trajectory cv = constant_velocity_rollout(p.human_state, 26, 0.1, Limits{});
  EXPECT_EQ(r.human.trajectory.states, cv.states);
  InteractionScene scene{p.robot_state, p.robot_goal, cv, {}, {}};
  const PlanResult direct = best_response(scene, r.robot_ideal, p.robot_config);
  EXPECT_EQ(direct.trajectory.states, r.robot.trajectory.states);
}

TEST(IbrPlan, DependsOnlyOnCurrentInputs) {
  const IbrProblem p = headon_problem(5);
  const IbrResult a = ibr_plan(p);
  ibr_plan(headon_problem(3));
  const IbrResult b = ibr_plan(p);
  EXPECT_EQ(a.robot.trajectory.states, b.robot.trajectory.states);
  EXPECT_EQ(a.human.trajectory.states, b.human.trajectory.states);
}

TEST(IbrPlan, MismatchedHorizonsThrow) {
  IbrProblem p = headon_problem(5);
  p.human_model_config.horizon = 10;
  EXPECT_THROW(ibr_plan(p), std::invalid_argument);
}

TEST(PlannerConfig, ValidateRejectsOutOfRange) {
  PlannerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.markup = 0.9;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = PlannerConfig{};
  c.collision_discount = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = PlannerConfig{};
  c.convenience_floor = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = PlannerConfig{};
  c.horizon = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace socnav
