#include "socnav/baselines.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace socnav {

namespace {

constexpr double kTiny = 1e-9;

Vec2 unit_or(const Vec2& v, const Vec2& fallback) {
  const double n = v.norm();
  return n > kTiny ? Vec2(v / n) : fallback;
}

Vec2 heading_of(const AgentState& s) { return {std::cos(s.theta), std::sin(s.theta)}; }

// Positions of everything the agent must keep away from, at the current time.
std::vector<std::pair<Vec2, Vec2>> obstacles(const Observation& obs) {
  std::vector<std::pair<Vec2, Vec2>> out;
  for (const ObservedAgent& o : obs.others) out.emplace_back(o.state.position(), o.state.velocity());
  for (const Peripheral& p : obs.peripherals) out.emplace_back(p.position, p.velocity);
  return out;
}

AgentControl track_goal(const Observation& obs, const ReactiveParams& params, const Limits& limits) {
  const Vec2 to_goal = obs.goal - obs.self.position();
  const double dist = to_goal.norm();
  if (dist < 1e-6) return limits.clamp({0.0, -params.speed_gain * obs.self.v});
  const double bearing = wrap_angle(std::atan2(to_goal.y(), to_goal.x()) - obs.self.theta);
  const double v_ref = std::min(params.desired_speed, dist);
  return limits.clamp({params.heading_gain * bearing, params.speed_gain * (v_ref - obs.self.v)});
}

}  // namespace

void SfmParams::validate() const {
  if (!(desired_speed > 0 && relaxation > 0 && repulsion > 0 && range > 0 && wall_repulsion > 0 &&
        wall_range > 0 && turn_gain > 0 && contact_radius > 0)) {
    throw std::invalid_argument("sfm parameters must be positive");
  }
}

void ReactiveParams::validate() const {
  if (!(horizon > 0 && collision_radius > 0 && heading_gain > 0 && speed_gain > 0 && desired_speed > 0)) {
    throw std::invalid_argument("reactive parameters must be positive");
  }
}

Vec2 sfm_force(const Observation& obs, const SfmParams& params) {
  const Vec2 p = obs.self.position();
  const Vec2 heading = heading_of(obs.self);
  const Vec2 desired = params.desired_speed * unit_or(obs.goal - p, Vec2::Zero());
  Vec2 force = (desired - obs.self.velocity()) / params.relaxation;

  const double cap = params.repulsion * std::exp(params.contact_radius / params.range);
  for (const auto& [q, unused] : obstacles(obs)) {
    const Vec2 away = p - q;
    const double dist = away.norm();
    const double magnitude = std::min(cap, params.repulsion * std::exp((params.contact_radius - dist) / params.range));
    force += magnitude * unit_or(away, Vec2(-heading));
  }
  // Walls repel from the agent's disk edge, half the contact distance.
  for (const Wall& w : obs.walls) {
    const double dist = w.signed_distance(p);
    const double magnitude = std::min(cap, params.wall_repulsion *
                                               std::exp((0.5 * params.contact_radius - dist) / params.wall_range));
    force += magnitude * w.normal;
  }
  return force;
}

AgentControl sfm_control(const Observation& obs, const SfmParams& params, const Limits& limits) {
  const Vec2 force = sfm_force(obs, params);
  const Vec2 heading = heading_of(obs.self);
  const double a = force.dot(heading);
  double omega = 0.0;
  if (force.norm() > kTiny) {
    const double cross = heading.x() * force.y() - heading.y() * force.x();
    omega = params.turn_gain * std::atan2(cross, heading.dot(force));
  }
  return limits.clamp({omega, a});
}

double predicted_min_distance(const Observation& obs, const AgentControl& control, double horizon,
                              const Limits& limits) {
  const int steps = std::max(1, static_cast<int>(std::lround(horizon / obs.dt)));
  const auto others = obstacles(obs);
  double closest = std::numeric_limits<double>::infinity();
  AgentState s = obs.self;
  for (int k = 1; k <= steps; ++k) {
    s = step(s, control, obs.dt, limits);
    for (const auto& [q, v] : others) closest = std::min(closest, (s.position() - (q + k * obs.dt * v)).norm());
  }
  return closest;
}

AgentControl reactive_cv_control(const Observation& obs, const ReactiveParams& params, const Limits& limits) {
  if (predicted_min_distance(obs, {}, params.horizon, limits) >= params.collision_radius) {
    return track_goal(obs, params, limits);
  }
  const std::array<double, 3> omegas{limits.omega.lo, 0.0, limits.omega.hi};
  const std::array<double, 3> accels{limits.accel.lo, 0.0, limits.accel.hi};
  AgentControl best;
  double best_clearance = -std::numeric_limits<double>::infinity();
  for (double a : accels) {
    for (double w : omegas) {
      const double clearance = predicted_min_distance(obs, {w, a}, params.horizon, limits);
      if (clearance > best_clearance + 1e-12) {
        best_clearance = clearance;
        best = {w, a};
      }
    }
  }
  return best;
}

PlannerConfig ours_config() { return PlannerConfig{}; }

PlannerConfig oc_config() { return PlannerConfig::optimal_control(); }

PlannerConfig vibr_config() {
  PlannerConfig cfg = PlannerConfig::optimal_control();
  cfg.ibr_iterations = 3;
  return cfg;
}

PolicyOutput plan_control(const Observation& obs, const PlannerConfig& robot, const PlannerConfig& human_model) {
  PolicyOutput out;
  // The nearest interactive agent is the IBR partner; every other agent is a constant-velocity obstacle.
  const ObservedAgent* partner = nullptr;
  double nearest = std::numeric_limits<double>::infinity();
  for (const ObservedAgent& o : obs.others) {
    const double d = (o.state.position() - obs.self.position()).norm();
    if (o.interactive && d < nearest) {
      nearest = d;
      partner = &o;
    }
  }
  std::vector<Peripheral> peripherals = obs.peripherals;
  for (const ObservedAgent& o : obs.others) {
    if (&o != partner) peripherals.push_back({o.state.position(), o.state.velocity()});
  }

  try {
    PlanResult plan;
    if (partner) {
      IbrProblem problem;
      problem.robot_state = obs.self;
      problem.robot_goal = obs.goal;
      problem.human_state = partner->state;
      problem.human_goal = partner->goal;
      problem.peripherals = std::move(peripherals);
      problem.walls = obs.walls;
      problem.robot_config = robot;
      problem.human_model_config = human_model;
      IbrResult r = ibr_plan(problem);
      plan = std::move(r.robot);
      plan.solve_time = r.solve_time;
    } else {
      const auto started = std::chrono::steady_clock::now();
      const IdealSolution ideal = solve_ideal(obs.self, obs.goal, obs.walls, robot);
      InteractionScene scene{obs.self, obs.goal, std::nullopt, std::move(peripherals), obs.walls};
      plan = best_response(scene, ideal, robot);
      plan.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    const AgentControl first = plan.trajectory.controls.front();
    out.diagnostics.solve_time = plan.solve_time;
    out.diagnostics.scp_iterations = plan.scp_iterations;
    out.diagnostics.slack_sum = plan.slack_sum();
    out.diagnostics.inconvenience = plan.inconvenience;
    out.diagnostics.degraded = plan.subproblem_failed;
    for (std::size_t t = 0; t < plan.trajectory.states.size(); ++t) {
      out.diagnostics.preview.push_back(plan.trajectory.position(t));
    }
    if (!first.finite()) {
      out.diagnostics.failed = true;
    } else {
      out.control = robot.limits.clamp(first);
    }
  } catch (const std::exception&) {
    out.diagnostics.failed = true;
  }
  return out;
}

PlannerPolicy::PlannerPolicy(std::string name, std::string label, PlannerConfig robot, PlannerConfig human_model)
    : name_(std::move(name)), label_(std::move(label)), robot_(std::move(robot)), human_model_(std::move(human_model)) {
  robot_.validate();
  human_model_.validate();
}

PolicyOutput PlannerPolicy::act(const Observation& obs) const { return plan_control(obs, robot_, human_model_); }

PolicyOutput SfmPolicy::act(const Observation& obs) const {
  return {sfm_control(obs, params_, limits_), {}};
}

PolicyOutput ReactiveCvPolicy::act(const Observation& obs) const {
  return {reactive_cv_control(obs, params_, limits_), {}};
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"ours", "vibr", "oc", "sfm", "reactive_cv"};
  return names;
}

bool is_policy_name(std::string_view name) {
  const auto& names = policy_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string policy_label(std::string_view name) {
  if (name == "ours") return "Ours";
  if (name == "vibr") return "vIBR";
  if (name == "oc") return "OC";
  if (name == "sfm") return "SFM";
  if (name == "reactive_cv") return "Reactive-CV";
  throw std::invalid_argument("unknown policy: " + std::string(name));
}

}  // namespace socnav
