#include "socnav/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace socnav {

namespace {

// Moments of the rotation over the unit interval, phi = omega * dt:
//   Ck(phi) = int_0^1 s^k cos(phi s) ds,   Dk(phi) = int_0^1 s^k sin(phi s) ds.
// Below this |phi| the closed forms lose digits to cancellation and the
// truncated series (error < 1e-16) is used instead.
constexpr double kSeriesThreshold = 0.05;

struct Moments {
  double c0, d0, c1, d1, c2, d2;
};

Moments rotation_moments(double phi) {
  Moments m{};
  if (std::abs(phi) < kSeriesThreshold) {
    const double p2 = phi * phi;
    const double p4 = p2 * p2;
    const double p6 = p4 * p2;
    m.c0 = 1.0 - p2 / 6.0 + p4 / 120.0 - p6 / 5040.0;
    m.d0 = phi * (1.0 / 2.0 - p2 / 24.0 + p4 / 720.0 - p6 / 40320.0);
    m.c1 = 1.0 / 2.0 - p2 / 8.0 + p4 / 144.0 - p6 / 5760.0;
    m.d1 = phi * (1.0 / 3.0 - p2 / 30.0 + p4 / 840.0 - p6 / 45360.0);
    m.c2 = 1.0 / 3.0 - p2 / 10.0 + p4 / 168.0 - p6 / 6480.0;
    m.d2 = phi * (1.0 / 4.0 - p2 / 36.0 + p4 / 960.0 - p6 / 50400.0);
    return m;
  }
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double p2 = phi * phi;
  const double p3 = p2 * phi;
  m.c0 = s / phi;
  m.d0 = (1.0 - c) / phi;
  m.c1 = (phi * s + c - 1.0) / p2;
  m.d1 = (s - phi * c) / p2;
  m.c2 = (p2 * s + 2.0 * phi * c - 2.0 * s) / p3;
  m.d2 = (-p2 * c + 2.0 * phi * s + 2.0 * c - 2.0) / p3;
  return m;
}

void require_finite(const AgentState& x, const AgentControl& u, double dt) {
  if (!x.finite() || !u.finite() || !std::isfinite(dt)) {
    throw DomainError("dynamics: non-finite state, control or step size");
  }
  if (dt <= 0.0) {
    throw DomainError("dynamics: step size must be positive");
  }
}

// Unclamped exact integral over one step.
Eigen::Vector4d integrate(const AgentState& x, const AgentControl& u, double dt, const Moments& m) {
  const double ct = std::cos(x.theta);
  const double st = std::sin(x.theta);
  const double cos_avg_v = ct * m.c0 - st * m.d0;  // int cos(theta + phi s) ds
  const double sin_avg_v = st * m.c0 + ct * m.d0;
  const double cos_avg_a = ct * m.c1 - st * m.d1;  // int s cos(theta + phi s) ds
  const double sin_avg_a = st * m.c1 + ct * m.d1;
  return {x.x + dt * (x.v * cos_avg_v + u.a * dt * cos_avg_a),
          x.y + dt * (x.v * sin_avg_v + u.a * dt * sin_avg_a),
          x.theta + u.omega * dt,
          x.v + u.a * dt};
}

}  // namespace

Vec2 AgentState::velocity() const { return {v * std::cos(theta), v * std::sin(theta)}; }

bool AgentState::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) && std::isfinite(v);
}

bool AgentControl::finite() const { return std::isfinite(omega) && std::isfinite(a); }

double Interval::clamp(double value) const { return std::min(std::max(value, lo), hi); }

void Limits::validate() const {
  if (omega.lo > omega.hi || accel.lo > accel.hi || speed.lo > speed.hi) {
    throw std::invalid_argument("limits: lower bound exceeds upper bound");
  }
  if (speed.lo < 0.0) {
    throw std::invalid_argument("limits: speed lower bound must be non-negative");
  }
}

AgentControl Limits::clamp(const AgentControl& u) const { return {omega.clamp(u.omega), accel.clamp(u.a)}; }

bool Limits::contains(const AgentControl& u, double tol) const {
  return omega.contains(u.omega, tol) && accel.contains(u.a, tol);
}

AgentState step(const AgentState& state, const AgentControl& control, double dt, const Limits& limits) {
  require_finite(state, control, dt);
  const Eigen::Vector4d next = integrate(state, control, dt, rotation_moments(control.omega * dt));
  AgentState out = AgentState::from_vector(next);
  out.v = limits.speed.clamp(out.v);
  return out;
}

Linearization linearize(const AgentState& state, const AgentControl& control, double dt) {
  require_finite(state, control, dt);
  const Moments m = rotation_moments(control.omega * dt);
  const double ct = std::cos(state.theta);
  const double st = std::sin(state.theta);
  const double v = state.v;
  const double a = control.a;

  const double cos_v = ct * m.c0 - st * m.d0;
  const double sin_v = st * m.c0 + ct * m.d0;
  const double cos_a = ct * m.c1 - st * m.d1;
  const double sin_a = st * m.c1 + ct * m.d1;
  // d/dphi of the moments: C0' = -D1, D0' = C1, C1' = -D2, D1' = C2.
  const double dcos_v = -ct * m.d1 - st * m.c1;
  const double dsin_v = -st * m.d1 + ct * m.c1;
  const double dcos_a = -ct * m.d2 - st * m.c2;
  const double dsin_a = -st * m.d2 + ct * m.c2;

  Linearization lin;
  lin.A.setIdentity();
  lin.A(0, 2) = -dt * (v * sin_v + a * dt * sin_a);
  lin.A(1, 2) = dt * (v * cos_v + a * dt * cos_a);
  lin.A(0, 3) = dt * cos_v;
  lin.A(1, 3) = dt * sin_v;

  lin.B.setZero();
  lin.B(0, 0) = dt * dt * (v * dcos_v + a * dt * dcos_a);
  lin.B(1, 0) = dt * dt * (v * dsin_v + a * dt * dsin_a);
  lin.B(0, 1) = dt * dt * cos_a;
  lin.B(1, 1) = dt * dt * sin_a;
  lin.B(2, 0) = dt;
  lin.B(3, 1) = dt;

  const Eigen::Vector4d f = integrate(state, control, dt, m);
  lin.c = f - lin.A * state.vector() - lin.B * control.vector();
  return lin;
}

Trajectory rollout(const AgentState& initial, std::span<const AgentControl> controls, double dt,
                   const Limits& limits) {
  if (controls.empty()) {
    throw std::invalid_argument("rollout: control sequence is empty");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.controls.assign(controls.begin(), controls.end());
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(initial);
  for (const AgentControl& u : controls) {
    traj.states.push_back(step(traj.states.back(), u, dt, limits));
  }
  return traj;
}

Trajectory constant_velocity_rollout(const AgentState& initial, std::size_t steps, double dt,
                                     const Limits& limits) {
  const std::vector<AgentControl> zeros(steps);
  return rollout(initial, zeros, dt, limits);
}

double wrap_angle(double angle) {
  return std::remainder(angle, 2.0 * std::numbers::pi);
}

}  // namespace socnav
