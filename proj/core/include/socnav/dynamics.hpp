#pragma once

/**
 * @file dynamics.hpp
 * @brief Dynamically-extended unicycle shared by every agent.
 *
 * State  x = [x, y, theta, v]
 * Input  u = [omega, a]
 *
 *     dx/dt = v cos(theta)
 *     dy/dt = v sin(theta)
 *     dtheta/dt = omega
 *     dv/dt = a
 *
 * The discrete map integrates these equations exactly over one step with the
 * control held constant, then clamps the speed into its bounds.
 */

#include <Eigen/Core>

#include <span>
#include <stdexcept>
#include <vector>

namespace socnav {

using Vec2 = Eigen::Vector2d;

struct AgentState {
  double x = 0.0;      ///< east [m]
  double y = 0.0;      ///< north [m]
  double theta = 0.0;  ///< heading [rad], not wrapped
  double v = 0.0;      ///< speed [m/s]

  Vec2 position() const { return {x, y}; }
  /// Planar velocity (v cos theta, v sin theta).
  Vec2 velocity() const;
  Eigen::Vector4d vector() const { return {x, y, theta, v}; }
  static AgentState from_vector(const Eigen::Vector4d& s) { return {s[0], s[1], s[2], s[3]}; }
  bool finite() const;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct AgentControl {
  double omega = 0.0;  ///< turn rate [rad/s]
  double a = 0.0;      ///< longitudinal acceleration [m/s^2]

  Eigen::Vector2d vector() const { return {omega, a}; }
  bool finite() const;

  friend bool operator==(const AgentControl&, const AgentControl&) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double clamp(double value) const;
  bool contains(double value, double tol = 0.0) const { return value >= lo - tol && value <= hi + tol; }
};

/// Control and speed limits. Defaults are omega in [-1, 1], a in [-1.5, 1.5], v in [0, 1.5].
struct Limits {
  Interval omega{-1.0, 1.0};
  Interval accel{-1.5, 1.5};
  Interval speed{0.0, 1.5};

  /// Throws std::invalid_argument if a pair is inverted or the speed floor is negative.
  void validate() const;
  AgentControl clamp(const AgentControl& u) const;
  bool contains(const AgentControl& u, double tol = 1e-12) const;
};

/// Raised when a non-finite state, control or step size reaches the dynamics.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// states has one more entry than controls; states[t + 1] follows from states[t], controls[t].
struct Trajectory {
  std::vector<AgentState> states;
  std::vector<AgentControl> controls;
  double dt = 0.1;

  /// Number of controls (T + 1 for a horizon-T plan).
  std::size_t steps() const { return controls.size(); }
  bool well_formed() const { return !states.empty() && states.size() == controls.size() + 1 && dt > 0.0; }
  Vec2 position(std::size_t t) const { return states.at(t).position(); }
};

struct Linearization {
  Eigen::Matrix4d A;
  Eigen::Matrix<double, 4, 2> B;
  Eigen::Vector4d c;
};

/// One zero-order-hold step followed by the speed clamp.
AgentState step(const AgentState& state, const AgentControl& control, double dt, const Limits& limits);

/// First-order expansion step(x, u) ~ A x + B u + c of the integrated map around (state, control).
/// The speed clamp is not differentiated; SCP keeps speeds feasible through explicit bounds.
Linearization linearize(const AgentState& state, const AgentControl& control, double dt);

Trajectory rollout(const AgentState& initial, std::span<const AgentControl> controls, double dt,
                   const Limits& limits);

/// Constant-velocity prediction: zero controls for `steps` steps.
Trajectory constant_velocity_rollout(const AgentState& initial, std::size_t steps, double dt,
                                     const Limits& limits);

double wrap_angle(double angle);

}  // namespace socnav
