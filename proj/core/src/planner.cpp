#include "socnav/planner.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace socnav {

namespace {

using Triplet = Eigen::Triplet<double>;
using Clock = std::chrono::steady_clock;

constexpr double kDegenerateDistance = 1e-9;
constexpr double kTrustRelax = 0.2;
constexpr double kTrustFloorRatio = 1e-3;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Sparse affine expression sum_j coeff_j z_j + constant.
struct AffineRow {
  std::vector<std::pair<int, double>> coeffs;
  double constant = 0.0;
  double weight = 1.0;
};

// sum_rows weight * (row . z + constant)^2 - rhs <= 0 as 1/2 z'Qz + g'z + c <= 0.
QuadraticConstraint sum_of_squares_constraint(const std::vector<AffineRow>& rows, int n, double rhs,
                                              std::string label) {
  std::vector<Triplet> trips;
  QuadraticConstraint qc;
  qc.g = Eigen::VectorXd::Zero(n);
  qc.c = -rhs;
  for (const AffineRow& row : rows) {
    for (const auto& [i, ci] : row.coeffs) {
      for (const auto& [j, cj] : row.coeffs) trips.emplace_back(i, j, 2.0 * row.weight * ci * cj);
      qc.g[i] += 2.0 * row.weight * row.constant * ci;
    }
    qc.c += row.weight * row.constant * row.constant;
  }
  qc.Q.resize(n, n);
  qc.Q.setFromTriplets(trips.begin(), trips.end());
  qc.label = std::move(label);
  return qc;
}

// Planar velocity linearized in (theta, v): vel ~ M [theta; v] + k.
struct VelocityModel {
  Eigen::Matrix2d M;
  Vec2 k;
};

VelocityModel velocity_model(const AgentState& s) {
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  VelocityModel vm;
  vm.M << -s.v * sn, c, s.v * c, sn;
  vm.k = s.velocity() - vm.M * Vec2(s.theta, s.v);
  return vm;
}

double stage_cost(const Trajectory& traj, const Vec2& goal, const PlannerConfig& cfg, double markup) {
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t t = 0; t < traj.controls.size(); ++t) {
    const Eigen::Vector2d u = traj.controls[t].vector();
    total += weight * (u.dot(cfg.cost.control_effort * u) +
                       cfg.cost.goal_running * (traj.position(t) - goal).squaredNorm());
    weight *= markup;
  }
  total += cfg.cost.goal_terminal * (traj.states.back().position() - goal).squaredNorm();
  return total;
}

struct BuildOptions {
  double markup = 1.0;
  double trust_weight = 0.0;
  bool budget = false;
};

FollowerProgram build_program(const InteractionScene& scene, const IdealSolution* ideal,
                              const LinearizationPoint& point, const PlannerConfig& cfg,
                              const BuildOptions& opts) {
  const int T = cfg.horizon;
  const VariableLayout layout(T);
  const int n = layout.size();
  const Trajectory& ref = point.trajectory;
  if (static_cast<int>(ref.states.size()) != T + 2 || static_cast<int>(ref.controls.size()) != T + 1) {
    throw std::invalid_argument("build_follower_program: linearization point has the wrong horizon");
  }

  FollowerProgram out{ConvexProgram(n), layout, false};
  ConvexProgram& prog = out.program;
  const Vec2& goal = scene.goal;

  // Objective.
  std::vector<Triplet> p_trips;
  double weight = 1.0;
  for (int t = 0; t <= T; ++t) {
    const Eigen::Matrix2d R = 2.0 * weight * cfg.cost.control_effort;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        if (R(i, j) != 0.0) p_trips.emplace_back(layout.control(t, i), layout.control(t, j), R(i, j));
      }
    }
    const double wg = weight * cfg.cost.goal_running;
    for (int i = 0; i < 2; ++i) {
      p_trips.emplace_back(layout.state(t, i), layout.state(t, i), 2.0 * wg);
      prog.q[layout.state(t, i)] -= 2.0 * wg * goal[i];
    }
    prog.constant += wg * goal.squaredNorm();
    weight *= opts.markup;
  }
  for (int i = 0; i < 2; ++i) {
    p_trips.emplace_back(layout.state(T + 1, i), layout.state(T + 1, i), 2.0 * cfg.cost.goal_terminal);
    prog.q[layout.state(T + 1, i)] -= 2.0 * cfg.cost.goal_terminal * goal[i];
  }
  prog.constant += cfg.cost.goal_terminal * goal.squaredNorm();

  double discount = 1.0;
  for (int t = 0; t <= T + 1; ++t) {
    p_trips.emplace_back(layout.slack(t), layout.slack(t), 2.0 * cfg.slack_weight * discount);
    discount *= cfg.collision_discount;
  }

  if (opts.trust_weight > 0.0) {
    const double beta = opts.trust_weight;
    auto trust = [&](int idx, double center) {
      p_trips.emplace_back(idx, idx, 2.0 * beta);
      prog.q[idx] -= 2.0 * beta * center;
      prog.constant += beta * center * center;
    };
    for (int t = 1; t <= T + 1; ++t) {
      const Eigen::Vector4d s = ref.states[t].vector();
      for (int i = 0; i < 4; ++i) trust(layout.state(t, i), s[i]);
    }
    for (int t = 0; t <= T; ++t) {
      trust(layout.control(t, 0), ref.controls[t].omega);
      trust(layout.control(t, 1), ref.controls[t].a);
    }
  }
  prog.P.setFromTriplets(p_trips.begin(), p_trips.end());

  // Dynamics and initial state.
  std::vector<Triplet> a_trips;
  std::vector<double> b_vals;
  int row = 0;
  const Eigen::Vector4d x0 = scene.start.vector();
  for (int i = 0; i < 4; ++i) {
    a_trips.emplace_back(row++, layout.state(0, i), 1.0);
    b_vals.push_back(x0[i]);
  }
  for (int t = 0; t <= T; ++t) {
    const Linearization lin = linearize(ref.states[t], ref.controls[t], cfg.dt);
    for (int i = 0; i < 4; ++i) {
      a_trips.emplace_back(row, layout.state(t + 1, i), 1.0);
      for (int j = 0; j < 4; ++j) {
        if (lin.A(i, j) != 0.0) a_trips.emplace_back(row, layout.state(t, j), -lin.A(i, j));
      }
      for (int j = 0; j < 2; ++j) {
        if (lin.B(i, j) != 0.0) a_trips.emplace_back(row, layout.control(t, j), -lin.B(i, j));
      }
      b_vals.push_back(lin.c[i]);
      ++row;
    }
  }
  prog.A.resize(row, n);
  prog.A.setFromTriplets(a_trips.begin(), a_trips.end());
  prog.b = Eigen::Map<Eigen::VectorXd>(b_vals.data(), row);

  // Bounds.
  for (int t = 1; t <= T + 1; ++t) {
    prog.lower[layout.state(t, 3)] = cfg.limits.speed.lo;
    prog.upper[layout.state(t, 3)] = cfg.limits.speed.hi;
  }
  for (int t = 0; t <= T; ++t) {
    prog.lower[layout.control(t, 0)] = cfg.limits.omega.lo;
    prog.upper[layout.control(t, 0)] = cfg.limits.omega.hi;
    prog.lower[layout.control(t, 1)] = cfg.limits.accel.lo;
    prog.upper[layout.control(t, 1)] = cfg.limits.accel.hi;
  }
  for (int t = 0; t <= T + 1; ++t) prog.lower[layout.slack(t)] = 0.0;

  // Inequalities: walls, then linearized clearance to the leader and peripherals.
  std::vector<Triplet> g_trips;
  std::vector<double> h_vals;
  row = 0;
  for (const Wall& wall : scene.walls) {
    for (int t = 1; t <= T + 1; ++t) {
      g_trips.emplace_back(row, layout.state(t, 0), -wall.normal.x());
      g_trips.emplace_back(row, layout.state(t, 1), -wall.normal.y());
      h_vals.push_back(-wall.offset);
      ++row;
    }
  }
  // |p - o| - d >= -eps linearized at p_ref: n'(p - o) - d >= -eps, n = unit(p_ref - o).
  auto clearance = [&](int t, const Vec2& obstacle) {
    Vec2 normal = ref.position(static_cast<std::size_t>(t)) - obstacle;
    const double dist = normal.norm();
    if (dist < kDegenerateDistance) {
      normal = Vec2(1.0, 0.0);
      out.degenerate_linearization = true;
    } else {
      normal /= dist;
    }
    g_trips.emplace_back(row, layout.state(t, 0), -normal.x());
    g_trips.emplace_back(row, layout.state(t, 1), -normal.y());
    g_trips.emplace_back(row, layout.slack(t), -1.0);
    h_vals.push_back(-normal.dot(obstacle) - cfg.collision_radius);
    ++row;
  };
  if (scene.leader) {
    if (static_cast<int>(scene.leader->states.size()) != T + 2) {
      throw std::invalid_argument("build_follower_program: leader trajectory must have T + 2 states");
    }
    for (int t = 0; t <= T + 1; ++t) clearance(t, scene.leader->position(static_cast<std::size_t>(t)));
  }
  for (const Peripheral& other : scene.peripherals) {
    for (int t = 0; t <= T + 1; ++t) clearance(t, other.at(t * cfg.dt));
  }
  prog.G.resize(row, n);
  prog.G.setFromTriplets(g_trips.begin(), g_trips.end());
  prog.h = Eigen::Map<Eigen::VectorXd>(h_vals.data(), row);

  if (opts.budget) {
    const double c_ideal = ideal->convenience;
    const double rhs = c_ideal + cfg.budget * std::max(c_ideal, cfg.convenience_floor);
    const Eigen::Vector3d& w = cfg.convenience_weights;
    std::vector<AffineRow> rows;
    for (int t = 0; t <= T; ++t) {
      for (int i = 0; i < 2; ++i) {
        rows.push_back({{{layout.state(t + 1, i), 1.0}, {layout.state(t, i), -1.0}}, 0.0, w[0]});
      }
    }
    std::vector<VelocityModel> vel(static_cast<std::size_t>(T + 2));
    for (int t = 0; t <= T + 1; ++t) vel[t] = velocity_model(ref.states[t]);
    for (int t = 0; t <= T; ++t) {
      const VelocityModel& a = vel[t];
      const VelocityModel& b = vel[t + 1];
      for (int i = 0; i < 2; ++i) {
        rows.push_back({{{layout.state(t + 1, 2), b.M(i, 0)},
                         {layout.state(t + 1, 3), b.M(i, 1)},
                         {layout.state(t, 2), -a.M(i, 0)},
                         {layout.state(t, 3), -a.M(i, 1)}},
                        b.k[i] - a.k[i],
                        w[1]});
      }
    }
    for (int i = 0; i < 2; ++i) rows.push_back({{{layout.state(T + 1, i), 1.0}}, -goal[i], w[2]});

    QuadraticConstraint budget = sum_of_squares_constraint(rows, n, rhs, "inconvenience_budget");
    if (!cfg.linearize_budget) {
      prog.quadratic.push_back(std::move(budget));
    } else {
      const Eigen::VectorXd zref = layout.pack(ref, point.slacks);
      const Eigen::VectorXd grad = budget.Q * zref + budget.g;
      const double value = budget.value(zref);
      SparseMatrix G(prog.G.rows() + 1, n);
      std::vector<Triplet> all;
      for (int k = 0; k < prog.G.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(prog.G, k); it; ++it) all.emplace_back(it.row(), it.col(), it.value());
      }
      for (int i = 0; i < n; ++i) {
        if (grad[i] != 0.0) all.emplace_back(static_cast<int>(prog.G.rows()), i, grad[i]);
      }
      G.setFromTriplets(all.begin(), all.end());
      prog.G = std::move(G);
      prog.h.conservativeResize(prog.h.size() + 1);
      prog.h[prog.h.size() - 1] = grad.dot(zref) - value;
    }
  }
  return out;
}

// Exact roll-out of the subproblem controls, clamped into limits.
Trajectory reroll(const AgentState& start, const VariableLayout& layout, const Eigen::VectorXd& z,
                  const PlannerConfig& cfg) {
  std::vector<AgentControl> controls = layout.controls(z);
  for (AgentControl& u : controls) u = cfg.limits.clamp(u);
  return rollout(start, controls, cfg.dt, cfg.limits);
}

double trajectory_distance(const VariableLayout& layout, const Trajectory& a, const Trajectory& b) {
  const std::vector<double> no_slack(static_cast<std::size_t>(layout.num_states()), 0.0);
  return (layout.pack(a, no_slack) - layout.pack(b, no_slack)).norm();
}

double trajectory_distance(const VariableLayout& layout, const Eigen::VectorXd& z, const Trajectory& b) {
  const std::vector<double> no_slack(static_cast<std::size_t>(layout.num_states()), 0.0);
  Eigen::VectorXd zb = layout.pack(b, no_slack);
  Eigen::VectorXd za = z;
  za.tail(layout.num_states()).setZero();
  return (za - zb).norm();
}

SolverSettings solver_settings(const PlannerConfig& cfg) {
  SolverSettings s;
  s.tolerance = cfg.solver_tolerance;
  s.max_iterations = cfg.solver_max_iterations;
  s.check_convexity = false;
  return s;
}

// Accepted steps loosen the trust region; the configured weight is the starting stiffness.
double relax_trust(double trust, const PlannerConfig& cfg) {
  return std::max(kTrustRelax * trust, kTrustFloorRatio * cfg.trust_weight);
}

// The exact merit no longer moves at the resolution of the convex model.
bool stagnant(double merit, double candidate, double tolerance) {
  return std::abs(candidate - merit) <= tolerance * std::max(1.0, std::abs(merit));
}

// A short step only means convergence while rejected steps have not stiffened the trust region.
bool settled(double trust, const PlannerConfig& cfg) { return trust <= cfg.trust_weight; }

bool usable(const SolveResult& r) {
  return r.status == SolveStatus::kOptimal ||
         (r.status == SolveStatus::kMaxIterations && r.max_violation <= 1e-4 && r.x.allFinite());
}

}  // namespace

void PlannerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("planner config: ") + what);
  };
  require(horizon >= 1, "horizon must be >= 1");
  require(dt > 0.0, "dt must be positive");
  require(markup >= 1.0, "markup must be >= 1");
  require(collision_discount > 0.0 && collision_discount <= 1.0, "collision discount must be in (0, 1]");
  require(slack_weight >= 0.0, "slack weight must be non-negative");
  require(budget >= 0.0, "budget must be non-negative");
  require(trust_weight >= 0.0, "trust weight must be non-negative");
  require((convenience_weights.array() >= 0.0).all(), "convenience weights must be non-negative");
  require(cost.goal_running >= 0.0 && cost.goal_terminal >= 0.0, "goal weights must be non-negative");
  const Eigen::Matrix2d sym = 0.5 * (cost.control_effort + cost.control_effort.transpose());
  require((sym - cost.control_effort).cwiseAbs().maxCoeff() < 1e-12, "control effort weight must be symmetric");
  require(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sym).eigenvalues().minCoeff() >= 0.0,
          "control effort weight must be PSD");
  require(collision_radius >= 0.0, "collision radius must be non-negative");
  require(ibr_iterations >= 0 && scp_iterations >= 1 && ideal_scp_iterations >= 1, "iteration counts");
  require(merit_tolerance >= 0.0 && ideal_merit_tolerance >= 0.0, "merit tolerances must be non-negative");
  require(convenience_floor > 0.0, "convenience floor must be positive");
  limits.validate();
}

PlannerConfig PlannerConfig::optimal_control() {
  PlannerConfig cfg;
  cfg.markup = 1.0;
  cfg.budget_enabled = false;
  cfg.slack_weight = 1000.0;
  cfg.ibr_iterations = 0;
  return cfg;
}

double PlanResult::slack_sum() const {
  double total = 0.0;
  for (double e : slacks) total += e;
  return total;
}

Eigen::VectorXd VariableLayout::pack(const Trajectory& traj, std::span<const double> slacks) const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(size());
  for (int t = 0; t < num_states(); ++t) z.segment<4>(state(t, 0)) = traj.states.at(t).vector();
  for (int t = 0; t < num_controls(); ++t) z.segment<2>(control(t, 0)) = traj.controls.at(t).vector();
  for (int t = 0; t < num_states() && t < static_cast<int>(slacks.size()); ++t) z[slack(t)] = slacks[t];
  return z;
}

std::vector<AgentControl> VariableLayout::controls(const Eigen::VectorXd& z) const {
  std::vector<AgentControl> out(static_cast<std::size_t>(num_controls()));
  for (int t = 0; t < num_controls(); ++t) out[t] = {z[control(t, 0)], z[control(t, 1)]};
  return out;
}

std::vector<double> VariableLayout::slacks(const Eigen::VectorXd& z) const {
  std::vector<double> out(static_cast<std::size_t>(num_states()));
  for (int t = 0; t < num_states(); ++t) out[t] = z[slack(t)];
  return out;
}

std::vector<std::string> VariableLayout::names() const {
  std::vector<std::string> out(static_cast<std::size_t>(size()));
  static const char* kState[] = {"x", "y", "theta", "v"};
  static const char* kControl[] = {"omega", "a"};
  for (int t = 0; t < num_states(); ++t) {
    for (int i = 0; i < 4; ++i) out[state(t, i)] = std::string(kState[i]) + "[" + std::to_string(t) + "]";
    out[slack(t)] = "eps[" + std::to_string(t) + "]";
  }
  for (int t = 0; t < num_controls(); ++t) {
    for (int i = 0; i < 2; ++i) out[control(t, i)] = std::string(kControl[i]) + "[" + std::to_string(t) + "]";
  }
  return out;
}

double convenience(const Trajectory& traj, const Vec2& goal, const Eigen::Vector3d& weights) {
  double path = 0.0;
  double velocity_change = 0.0;
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    path += (traj.position(t + 1) - traj.position(t)).squaredNorm();
    velocity_change += (traj.states[t + 1].velocity() - traj.states[t].velocity()).squaredNorm();
  }
  const double to_goal = (traj.states.back().position() - goal).squaredNorm();
  return weights[0] * path + weights[1] * velocity_change + weights[2] * to_goal;
}

double inconvenience(const Trajectory& traj, const IdealSolution& ideal, const Vec2& goal,
                     const Eigen::Vector3d& weights, double convenience_floor) {
  return (convenience(traj, goal, weights) - ideal.convenience) / std::max(ideal.convenience, convenience_floor);
}

std::vector<double> collision_slacks(const InteractionScene& scene, const Trajectory& traj,
                                     const PlannerConfig& config) {
  std::vector<double> eps(traj.states.size(), 0.0);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    const Vec2 p = traj.position(t);
    double deficit = 0.0;
    if (scene.leader && t < scene.leader->states.size()) {
      deficit = std::max(deficit, config.collision_radius - (p - scene.leader->position(t)).norm());
    }
    for (const Peripheral& other : scene.peripherals) {
      deficit = std::max(deficit, config.collision_radius - (p - other.at(static_cast<double>(t) * config.dt)).norm());
    }
    eps[t] = deficit;
  }
  return eps;
}

double follower_objective(const InteractionScene& scene, const Trajectory& traj, const PlannerConfig& config) {
  double total = stage_cost(traj, scene.goal, config, config.markup);
  const std::vector<double> eps = collision_slacks(scene, traj, config);
  double discount = 1.0;
  for (double e : eps) {
    total += config.slack_weight * discount * e * e;
    discount *= config.collision_discount;
  }
  return total;
}

IdealSolution solve_ideal(const AgentState& start, const Vec2& goal, std::span<const Wall> walls,
                          const PlannerConfig& config) {
  config.validate();
  if (!start.finite() || !goal.allFinite()) throw DomainError("solve_ideal: non-finite start or goal");

  InteractionScene scene;
  scene.start = start;
  scene.goal = goal;
  scene.walls.assign(walls.begin(), walls.end());

  const std::vector<AgentControl> coast(static_cast<std::size_t>(config.horizon + 1));
  IdealSolution best;
  best.trajectory = rollout(start, coast, config.dt, config.limits);
  double merit = stage_cost(best.trajectory, goal, config, 1.0);
  const std::vector<double> zero_slack(static_cast<std::size_t>(config.horizon + 2), 0.0);
  const VariableLayout layout(config.horizon);
  double trust = config.trust_weight;

  for (int it = 0; it < config.ideal_scp_iterations; ++it) {
    BuildOptions opts;
    opts.markup = 1.0;
    opts.trust_weight = trust;
    const FollowerProgram fp = build_program(scene, nullptr, {best.trajectory, zero_slack}, config, opts);
    const SolveResult res =
        solve(fp.program, layout.pack(best.trajectory, zero_slack), solver_settings(config));
    ++best.iterations;
    if (!usable(res)) break;
    if (trajectory_distance(layout, res.x, best.trajectory) < config.scp_tolerance) {
      if (settled(trust, config)) {
        best.converged = true;
        break;
      }
      trust = relax_trust(trust, config);
      continue;
    }
    Trajectory candidate = reroll(start, layout, res.x, config);
    const double cand_merit = stage_cost(candidate, goal, config, 1.0);
    const bool stalled = stagnant(merit, cand_merit, config.ideal_merit_tolerance);
    if (cand_merit <= merit + 1e-12 * std::max(1.0, std::abs(merit))) {
      const double change = trajectory_distance(layout, candidate, best.trajectory);
      best.trajectory = std::move(candidate);
      merit = cand_merit;
      const bool short_step = change < config.scp_tolerance && settled(trust, config);
      trust = relax_trust(trust, config);
      if (short_step || stalled) {
        best.converged = true;
        break;
      }
    } else {
      trust *= 10.0;
    }
  }
  best.convenience = convenience(best.trajectory, goal, config.convenience_weights);
  return best;
}

FollowerProgram build_follower_program(const InteractionScene& scene, const IdealSolution& ideal,
                                       const LinearizationPoint& point, const PlannerConfig& config) {
  config.validate();
  BuildOptions opts;
  opts.markup = config.markup;
  opts.trust_weight = config.trust_weight;
  opts.budget = config.budget_enabled;
  FollowerProgram fp = build_program(scene, &ideal, point, config, opts);
  fp.program.variable_names = fp.layout.names();
  return fp;
}

PlanResult best_response(const InteractionScene& scene, const IdealSolution& ideal, const PlannerConfig& config) {
  const auto started = Clock::now();
  config.validate();
  if (static_cast<int>(ideal.trajectory.controls.size()) != config.horizon + 1) {
    throw std::invalid_argument("best_response: ideal trajectory has the wrong horizon");
  }
  const VariableLayout layout(config.horizon);

  PlanResult result;
  Trajectory current = rollout(scene.start, ideal.trajectory.controls, config.dt, config.limits);
  std::vector<double> slacks = collision_slacks(scene, current, config);
  double merit = follower_objective(scene, current, config);
  result.objective_history.push_back(merit);
  double trust = config.trust_weight;

  BuildOptions opts;
  opts.markup = config.markup;
  opts.budget = config.budget_enabled;
  const double budget_limit = config.budget + config.budget_tolerance;

  for (int it = 0; it < config.scp_iterations; ++it) {
    opts.trust_weight = trust;
    const FollowerProgram fp = build_program(scene, &ideal, {current, slacks}, config, opts);
    result.degenerate_linearization = result.degenerate_linearization || fp.degenerate_linearization;
    const SolveResult res = solve(fp.program, layout.pack(current, slacks), solver_settings(config));
    ++result.scp_iterations;
    if (!usable(res)) {
      result.subproblem_failed = true;
      break;
    }
    if (trajectory_distance(layout, res.x, current) < config.scp_tolerance) {
      if (settled(trust, config)) {
        result.converged = true;
        break;
      }
      trust = relax_trust(trust, config);
      continue;
    }
    Trajectory candidate = reroll(scene.start, layout, res.x, config);
    const double cand_merit = follower_objective(scene, candidate, config);
    const bool within_budget =
        !config.budget_enabled ||
        inconvenience(candidate, ideal, scene.goal, config.convenience_weights, config.convenience_floor) <=
            budget_limit;
    const bool stalled = stagnant(merit, cand_merit, config.merit_tolerance);
    if (within_budget && cand_merit <= merit + 1e-12 * std::max(1.0, std::abs(merit))) {
      const double change = trajectory_distance(layout, candidate, current);
      current = std::move(candidate);
      slacks = collision_slacks(scene, current, config);
      merit = cand_merit;
      result.objective_history.push_back(merit);
      const bool short_step = change < config.scp_tolerance && settled(trust, config);
      trust = relax_trust(trust, config);
      if (short_step || stalled) {
        result.converged = true;
        break;
      }
    } else if (within_budget && stalled) {
      result.converged = true;
      break;
    } else {
      trust *= 10.0;
    }
  }

  result.trajectory = std::move(current);
  result.slacks = std::move(slacks);
  result.inconvenience =
      inconvenience(result.trajectory, ideal, scene.goal, config.convenience_weights, config.convenience_floor);
  result.solve_time = seconds_since(started);
  return result;
}

IbrResult ibr_plan(const IbrProblem& problem) {
  const auto started = Clock::now();
  const PlannerConfig& rc = problem.robot_config;
  const PlannerConfig& hc = problem.human_model_config;
  rc.validate();
  hc.validate();
  if (!problem.robot_state.finite() || !problem.human_state.finite()) {
    throw DomainError("ibr_plan: non-finite agent state");
  }
  if (rc.horizon != hc.horizon || rc.dt != hc.dt) {
    throw std::invalid_argument("ibr_plan: robot and human model must share horizon and dt");
  }

  IbrResult out;
  out.robot_ideal = solve_ideal(problem.robot_state, problem.robot_goal, problem.walls, rc);

  InteractionScene robot_scene;
  robot_scene.start = problem.robot_state;
  robot_scene.goal = problem.robot_goal;
  robot_scene.peripherals = problem.peripherals;
  robot_scene.walls = problem.walls;

  if (rc.ibr_iterations == 0) {
    out.human.trajectory = constant_velocity_rollout(problem.human_state, static_cast<std::size_t>(rc.horizon + 1),
                                                     rc.dt, hc.limits);
    robot_scene.leader = out.human.trajectory;
    out.robot = best_response(robot_scene, out.robot_ideal, rc);
    out.solve_time = seconds_since(started);
    return out;
  }

  const IdealSolution human_ideal = solve_ideal(problem.human_state, problem.human_goal, problem.walls, hc);
  InteractionScene human_scene;
  human_scene.start = problem.human_state;
  human_scene.goal = problem.human_goal;
  human_scene.peripherals = problem.peripherals;
  human_scene.walls = problem.walls;

  Trajectory human_plan = human_ideal.trajectory;
  for (int k = 0; k < rc.ibr_iterations; ++k) {
    robot_scene.leader = human_plan;
    out.robot = best_response(robot_scene, out.robot_ideal, rc);
    human_scene.leader = out.robot.trajectory;
    out.human = best_response(human_scene, human_ideal, hc);
    human_plan = out.human.trajectory;
  }
  out.solve_time = seconds_since(started);
  return out;
}

}  // namespace socnav
