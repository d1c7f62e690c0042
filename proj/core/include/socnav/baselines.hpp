#pragma once

/**
 * @file baselines.hpp
 * @brief Control policies behind one interface: the proposed planner and the comparison methods.
 *
 * Every policy maps an observation of the world to one control within limits
 * and keeps no state between calls.
 *
 *   name          label         behavior
 *   ours          Ours          IBR with markup, inconvenience budget and discounted slack
 *   vibr          vIBR          IBR without markup or budget, stiff slack
 *   oc            OC            single best response to constant-velocity predictions
 *   sfm           SFM           social forces mapped to unicycle controls
 *   reactive_cv   Reactive-CV   goal tracking, extremal evasion when a constant-velocity conflict is predicted
 */

#include "socnav/planner.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace socnav {

struct ObservedAgent {
  AgentState state;
  Vec2 goal = Vec2::Zero();
  /// Interactive agents take part in IBR; the others are constant-velocity obstacles.
  bool interactive = true;
};

struct Observation {
  AgentState self;
  Vec2 goal = Vec2::Zero();
  std::vector<ObservedAgent> others;
  std::vector<Peripheral> peripherals;
  std::vector<Wall> walls;
  double dt = 0.1;
};

struct PolicyDiagnostics {
  double solve_time = 0.0;  ///< [s], wall clock; never written to deterministic logs
  int scp_iterations = 0;
  double slack_sum = 0.0;
  double inconvenience = 0.0;
  bool degraded = false;  ///< a subproblem failed but a usable plan was returned
  bool failed = false;    ///< no usable control; the caller holds its previous control
  std::vector<Vec2> preview;  ///< planned positions, empty for reactive policies
};

struct PolicyOutput {
  AgentControl control;
  PolicyDiagnostics diagnostics;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyOutput act(const Observation& obs) const = 0;
  /// Registered name, e.g. "reactive_cv".
  virtual std::string name() const = 0;
  /// Display label, e.g. "Reactive-CV".
  virtual std::string label() const = 0;
};

struct SfmParams {
  double desired_speed = 1.5;  ///< [m/s]
  double relaxation = 0.5;     ///< [s]
  double repulsion = 2.0;      ///< A [m/s^2]
  double range = 0.8;          ///< B [m]
  double wall_repulsion = 2.0;
  double wall_range = 0.3;
  double turn_gain = 2.0;       ///< k_omega
  double contact_radius = 1.0;  ///< d_coll [m]

  void validate() const;
};

struct ReactiveParams {
  double horizon = 2.5;  ///< [s]
  double collision_radius = 1.0;
  double heading_gain = 2.0;
  double speed_gain = 2.0;
  double desired_speed = 1.5;

  void validate() const;
};

/// Net social force on the agent: goal relaxation, pairwise repulsion, wall repulsion.
Vec2 sfm_force(const Observation& obs, const SfmParams& params);
AgentControl sfm_control(const Observation& obs, const SfmParams& params, const Limits& limits);

/// Smallest predicted distance over steps 1..horizon/dt when the agent holds `control`
/// and every other agent keeps its current velocity.
double predicted_min_distance(const Observation& obs, const AgentControl& control, double horizon,
                              const Limits& limits);
AgentControl reactive_cv_control(const Observation& obs, const ReactiveParams& params, const Limits& limits);

/// Planner-backed policies. `robot` is the agent's own configuration, `human_model` its model of the partner.
PolicyOutput plan_control(const Observation& obs, const PlannerConfig& robot, const PlannerConfig& human_model);

/// Ours: the reference parameters for both the robot and its model of the human.
PlannerConfig ours_config();
/// OC: no markup, no budget, slack weight 1000, no IBR iterations.
PlannerConfig oc_config();
/// vIBR: the OC configuration with three IBR iterations.
PlannerConfig vibr_config();

class PlannerPolicy final : public Policy {
 public:
  PlannerPolicy(std::string name, std::string label, PlannerConfig robot, PlannerConfig human_model);
  PolicyOutput act(const Observation& obs) const override;
  std::string name() const override { return name_; }
  std::string label() const override { return label_; }
  const PlannerConfig& config() const { return robot_; }
  const PlannerConfig& human_model() const { return human_model_; }

 private:
  std::string name_;
  std::string label_;
  PlannerConfig robot_;
  PlannerConfig human_model_;
};

class SfmPolicy final : public Policy {
 public:
  explicit SfmPolicy(SfmParams params = {}, Limits limits = {}) : params_(params), limits_(limits) {}
  PolicyOutput act(const Observation& obs) const override;
  std::string name() const override { return "sfm"; }
  std::string label() const override { return "SFM"; }

 private:
  SfmParams params_;
  Limits limits_;
};

class ReactiveCvPolicy final : public Policy {
 public:
  explicit ReactiveCvPolicy(ReactiveParams params = {}, Limits limits = {}) : params_(params), limits_(limits) {}
  PolicyOutput act(const Observation& obs) const override;
  std::string name() const override { return "reactive_cv"; }
  std::string label() const override { return "Reactive-CV"; }

 private:
  ReactiveParams params_;
  Limits limits_;
};

/// "ours", "vibr", "oc", "sfm", "reactive_cv".
const std::vector<std::string>& policy_names();
bool is_policy_name(std::string_view name);
std::string policy_label(std::string_view name);

}  // namespace socnav
