#include "socnav/config_io.hpp"

#include <array>
#include <set>

namespace socnav {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& doc, std::string context) : doc_(doc), context_(std::move(context)) {
    if (!doc_.is_object()) throw ConfigError(context_ + ": expected an object");
  }

  void done() const {
    for (const auto& [key, unused] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError(context_ + ": unknown key '" + key + "'");
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!doc_.contains(key)) return;
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(context_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return doc_.contains(key) ? &doc_.at(key) : nullptr;
  }

 private:
  const json& doc_;
  std::string context_;
  std::set<std::string> seen_;
};

json pair(const Interval& i) { return json::array({i.lo, i.hi}); }

void read_interval(Reader& r, const char* key, Interval& out) {
  std::array<double, 2> v{out.lo, out.hi};
  r.read(key, v);
  out = {v[0], v[1]};
}

}  // namespace

json to_json(const Limits& limits) {
  return {{"omega", pair(limits.omega)}, {"accel", pair(limits.accel)}, {"speed", pair(limits.speed)}};
}

Limits limits_from_json(const json& doc, Limits base) {
  Reader r(doc, "limits");
  read_interval(r, "omega", base.omega);
  read_interval(r, "accel", base.accel);
  read_interval(r, "speed", base.speed);
  r.done();
  return base;
}

json to_json(const PlannerConfig& c) {
  const Eigen::Matrix2d& R = c.cost.control_effort;
  return {
      {"horizon", c.horizon},
      {"dt", c.dt},
      {"markup", c.markup},
      {"collision_discount", c.collision_discount},
      {"slack_weight", c.slack_weight},
      {"budget_enabled", c.budget_enabled},
      {"budget", c.budget},
      {"trust_weight", c.trust_weight},
      {"convenience_weights", {c.convenience_weights[0], c.convenience_weights[1], c.convenience_weights[2]}},
      {"control_effort", {{R(0, 0), R(0, 1)}, {R(1, 0), R(1, 1)}}},
      {"goal_running", c.cost.goal_running},
      {"goal_terminal", c.cost.goal_terminal},
      {"collision_radius", c.collision_radius},
      {"ibr_iterations", c.ibr_iterations},
      {"scp_iterations", c.scp_iterations},
      {"ideal_scp_iterations", c.ideal_scp_iterations},
      {"scp_tolerance", c.scp_tolerance},
      {"merit_tolerance", c.merit_tolerance},
      {"ideal_merit_tolerance", c.ideal_merit_tolerance},
      {"convenience_floor", c.convenience_floor},
      {"budget_tolerance", c.budget_tolerance},
      {"linearize_budget", c.linearize_budget},
      {"solver_tolerance", c.solver_tolerance},
      {"solver_max_iterations", c.solver_max_iterations},
      {"limits", to_json(c.limits)},
  };
}

PlannerConfig planner_config_from_json(const json& doc, PlannerConfig c) {
  {
    Reader r(doc, "planner");
    r.read("horizon", c.horizon);
    r.read("dt", c.dt);
    r.read("markup", c.markup);
    r.read("collision_discount", c.collision_discount);
    r.read("slack_weight", c.slack_weight);
    r.read("budget_enabled", c.budget_enabled);
    r.read("budget", c.budget);
    r.read("trust_weight", c.trust_weight);
    std::array<double, 3> w{c.convenience_weights[0], c.convenience_weights[1], c.convenience_weights[2]};
    r.read("convenience_weights", w);
    c.convenience_weights = {w[0], w[1], w[2]};
    const Eigen::Matrix2d& R = c.cost.control_effort;
    std::array<std::array<double, 2>, 2> m{{{R(0, 0), R(0, 1)}, {R(1, 0), R(1, 1)}}};
    r.read("control_effort", m);
    c.cost.control_effort << m[0][0], m[0][1], m[1][0], m[1][1];
    r.read("goal_running", c.cost.goal_running);
    r.read("goal_terminal", c.cost.goal_terminal);
    r.read("collision_radius", c.collision_radius);
    r.read("ibr_iterations", c.ibr_iterations);
    r.read("scp_iterations", c.scp_iterations);
    r.read("ideal_scp_iterations", c.ideal_scp_iterations);
    r.read("scp_tolerance", c.scp_tolerance);
    r.read("merit_tolerance", c.merit_tolerance);
    r.read("ideal_merit_tolerance", c.ideal_merit_tolerance);
    r.read("convenience_floor", c.convenience_floor);
    r.read("budget_tolerance", c.budget_tolerance);
    r.read("linearize_budget", c.linearize_budget);
    r.read("solver_tolerance", c.solver_tolerance);
    r.read("solver_max_iterations", c.solver_max_iterations);
    if (const json* limits = r.child("limits")) c.limits = limits_from_json(*limits, c.limits);
    r.done();
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json to_json(const SfmParams& p) {
  return {{"desired_speed", p.desired_speed}, {"relaxation", p.relaxation},         {"repulsion", p.repulsion},
          {"range", p.range},                 {"wall_repulsion", p.wall_repulsion}, {"wall_range", p.wall_range},
          {"turn_gain", p.turn_gain},         {"contact_radius", p.contact_radius}};
}

SfmParams sfm_params_from_json(const json& doc, SfmParams p) {
  {
    Reader r(doc, "sfm");
    r.read("desired_speed", p.desired_speed);
    r.read("relaxation", p.relaxation);
    r.read("repulsion", p.repulsion);
    r.read("range", p.range);
    r.read("wall_repulsion", p.wall_repulsion);
    r.read("wall_range", p.wall_range);
    r.read("turn_gain", p.turn_gain);
    r.read("contact_radius", p.contact_radius);
    r.done();
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

json to_json(const ReactiveParams& p) {
  return {{"horizon", p.horizon},
          {"collision_radius", p.collision_radius},
          {"heading_gain", p.heading_gain},
          {"speed_gain", p.speed_gain},
          {"desired_speed", p.desired_speed}};
}

ReactiveParams reactive_params_from_json(const json& doc, ReactiveParams p) {
  {
    Reader r(doc, "reactive");
    r.read("horizon", p.horizon);
    r.read("collision_radius", p.collision_radius);
    r.read("heading_gain", p.heading_gain);
    r.read("speed_gain", p.speed_gain);
    r.read("desired_speed", p.desired_speed);
    r.done();
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

void apply_override(json& tree, std::string_view key, std::string_view value, bool create) {
  if (key.empty()) throw ConfigError("override: empty key");
  json* node = &tree;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = key.find('.', begin);
    const std::string part(key.substr(begin, dot == std::string_view::npos ? std::string_view::npos : dot - begin));
    if (part.empty()) throw ConfigError("override: malformed key '" + std::string(key) + "'");
    if (!node->is_object()) throw ConfigError("override: '" + std::string(key) + "' does not name an object path");
    if (dot == std::string_view::npos) {
      if (!create && !node->contains(part)) throw ConfigError("override: unknown key '" + std::string(key) + "'");
      json parsed = json::parse(value, nullptr, false);
      (*node)[part] = parsed.is_discarded() ? json(std::string(value)) : std::move(parsed);
      return;
    }
    if (!node->contains(part)) {
      if (!create) throw ConfigError("override: unknown key '" + std::string(key) + "'");
      (*node)[part] = json::object();
    }
    node = &(*node)[part];
    begin = dot + 1;
  }
}

std::pair<std::string, std::string> split_override(std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override must look like key=value: '" + std::string(assignment) + "'");
  }
  return {std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1))};
}

}  // namespace socnav
