#pragma once

/**
 * @file planner.hpp
 * @brief Legible and proactive trajectory planning with iterated best response.
 *
 * One best response solves the follower problem against a fixed leader plan:
 *
 *   min  sum_t mu^t J(x_t, u_t) + gamma0 sum_t gamma^t eps_t^2 + J_T(x_{T+1})
 *   s.t. dynamics, x_0 = current state
 *        speed, control and wall constraints
 *        |p_t - p_leader,t| - d_coll >= -eps_t,  eps_t >= 0
 *        inconvenience(trajectory) <= budget
 *
 * by sequential convex programming: dynamics and collision distances are
 * linearized around the previous iterate and a quadratic trust-region cost
 * keeps each step local. The inconvenience budget stays a convex quadratic
 * constraint inside every subproblem.
 *
 * Inconvenience compares a trajectory's convenience with that of the ideal
 * trajectory, i.e. the optimum when no other agent is present:
 *
 *   J_incon = (c(traj) - c(ideal)) / max(c(ideal), c_floor).
 */

#include "socnav/convex.hpp"
#include "socnav/dynamics.hpp"

#include <optional>
#include <span>
#include <vector>

namespace socnav {

struct CostWeights {
  Eigen::Matrix2d control_effort = Eigen::Matrix2d::Identity();  ///< on [omega, a]
  double goal_running = 0.1;
  double goal_terminal = 10.0;
};

struct PlannerConfig {
  int horizon = 25;  ///< T; plans have T + 1 controls and T + 2 states
  double dt = 0.1;
  double markup = 1.05;              ///< mu >= 1
  double collision_discount = 0.98;  ///< gamma in (0, 1]
  double slack_weight = 150.0;       ///< gamma0
  bool budget_enabled = true;
  double budget = 0.2;  ///< beta_F
  double trust_weight = 5.0;
  Eigen::Vector3d convenience_weights{1.0, 1.0, 1.0};
  CostWeights cost;
  double collision_radius = 1.0;
  int ibr_iterations = 3;
  int scp_iterations = 10;
  /// Ideal trajectories start from a straight coast and usually need more steps.
  int ideal_scp_iterations = 20;
  double scp_tolerance = 1e-3;
  /// Also stop once a step changes the exact objective by less than this, relative.
  double merit_tolerance = 1e-5;
  /// Same for the ideal trajectory, which every inconvenience is measured against.
  double ideal_merit_tolerance = 1e-7;
  double convenience_floor = 1e-3;
  double budget_tolerance = 1e-3;
  /// Debug fallback: replace the quadratic budget with its tangent half-space.
  bool linearize_budget = false;
  double solver_tolerance = 1e-6;
  int solver_max_iterations = 200;
  Limits limits;

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;

  /// Optimal-control baseline: no markup, no budget, stiff slack, no IBR.
  static PlannerConfig optimal_control();
};

/// Half-plane { p : normal . p >= offset }, normal of unit length.
struct Wall {
  Vec2 normal{0.0, 1.0};
  double offset = 0.0;

  double signed_distance(const Vec2& p) const { return normal.dot(p) - offset; }
};

/// Non-interacting agent predicted at constant velocity.
struct Peripheral {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();

  Vec2 at(double time) const { return position + time * velocity; }
};

struct InteractionScene {
  AgentState start;
  Vec2 goal = Vec2::Zero();
  /// Fixed leader plan (T + 2 states); absent when planning alone.
  std::optional<Trajectory> leader;
  std::vector<Peripheral> peripherals;
  std::vector<Wall> walls;
};

struct IdealSolution {
  Trajectory trajectory;
  double convenience = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct PlanResult {
  Trajectory trajectory;
  std::vector<double> slacks;  ///< eps_0..eps_{T+1}
  double inconvenience = 0.0;
  int scp_iterations = 0;
  std::vector<double> objective_history;  ///< accepted iterates, starting with the initialization
  double solve_time = 0.0;                ///< [s]
  bool converged = false;
  bool subproblem_failed = false;
  bool degenerate_linearization = false;

  double slack_sum() const;
};

/// Index map of the flat decision vector [states | controls | slacks].
class VariableLayout {
 public:
  explicit VariableLayout(int horizon) : horizon_(horizon) {}

  int horizon() const { return horizon_; }
  int num_states() const { return horizon_ + 2; }
  int num_controls() const { return horizon_ + 1; }
  int state(int t, int i) const { return 4 * t + i; }
  int control(int t, int i) const { return 4 * num_states() + 2 * t + i; }
  int slack(int t) const { return 4 * num_states() + 2 * num_controls() + t; }
  int size() const { return 4 * num_states() + 2 * num_controls() + num_states(); }

  Eigen::VectorXd pack(const Trajectory& traj, std::span<const double> slacks) const;
  std::vector<AgentControl> controls(const Eigen::VectorXd& z) const;
  std::vector<double> slacks(const Eigen::VectorXd& z) const;
  std::vector<std::string> names() const;

 private:
  int horizon_;
};

struct LinearizationPoint {
  Trajectory trajectory;
  std::vector<double> slacks;
};

struct FollowerProgram {
  ConvexProgram program;
  VariableLayout layout;
  bool degenerate_linearization = false;
};

/// w1 sum |p_{t+1} - p_t|^2 + w2 sum |vel_{t+1} - vel_t|^2 + w3 |p_end - goal|^2.
double convenience(const Trajectory& traj, const Vec2& goal, const Eigen::Vector3d& weights);

double inconvenience(const Trajectory& traj, const IdealSolution& ideal, const Vec2& goal,
                     const Eigen::Vector3d& weights, double convenience_floor);

/// Exact follower objective of a trajectory: marked-up stage cost, discounted
/// slack penalty on the true clearance deficits, terminal cost.
double follower_objective(const InteractionScene& scene, const Trajectory& traj, const PlannerConfig& config);

/// Clearance deficits max(0, d_coll - distance) to the leader and peripherals, per state.
std::vector<double> collision_slacks(const InteractionScene& scene, const Trajectory& traj,
                                     const PlannerConfig& config);

IdealSolution solve_ideal(const AgentState& start, const Vec2& goal, std::span<const Wall> walls,
                          const PlannerConfig& config);

FollowerProgram build_follower_program(const InteractionScene& scene, const IdealSolution& ideal,
                                       const LinearizationPoint& point, const PlannerConfig& config);

PlanResult best_response(const InteractionScene& scene, const IdealSolution& ideal, const PlannerConfig& config);

struct IbrProblem {
  AgentState robot_state;
  Vec2 robot_goal = Vec2::Zero();
  AgentState human_state;
  Vec2 human_goal = Vec2::Zero();
  std::vector<Peripheral> peripherals;
  std::vector<Wall> walls;
  PlannerConfig robot_config;
  PlannerConfig human_model_config;
};

struct IbrResult {
  PlanResult robot;
  PlanResult human;  ///< predicted response of the modeled human
  IdealSolution robot_ideal;
  double solve_time = 0.0;  ///< [s], whole call
};

/// With zero IBR iterations the robot answers a constant-velocity prediction of the human once.
IbrResult ibr_plan(const IbrProblem& problem);

}  // namespace socnav
