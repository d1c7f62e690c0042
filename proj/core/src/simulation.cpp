#include "socnav/simulation.hpp"

#include "socnav/config_io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <thread>

namespace socnav {

using nlohmann::json;

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json state_json(const AgentState& s) { return {{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"v", s.v}}; }

AgentState state_from(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>(), j.at("v").get<double>()};
}

const json& section(const json& config, const char* key) {
  static const json empty = json::object();
  return config.contains(key) ? config.at(key) : empty;
}

void check_sections(const json& config, std::initializer_list<const char*> allowed, const std::string& name) {
  if (!config.is_object()) throw ConfigError(name + ": policy config must be an object");
  for (const auto& [key, unused] : config.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError(name + ": unexpected config section '" + key + "'");
    }
  }
}

PlannerConfig human_ibr_config() {
  PlannerConfig cfg;
  cfg.markup = 1.0;
  cfg.budget = 0.25;
  return cfg;
}

// Distinct, seed-derived stream per agent.
std::mt19937_64 agent_rng(std::uint64_t seed, std::size_t agent) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(agent), 0x5eedu};
  return std::mt19937_64(seq);
}

}  // namespace

const char* to_string(HumanVariant variant) { return variant == HumanVariant::kIbr ? "ibr" : "oc"; }

HumanVariant human_variant_from_string(std::string_view name) {
  if (name == "ibr") return HumanVariant::kIbr;
  if (name == "oc") return HumanVariant::kOc;
  throw ConfigError("unknown human model '" + std::string(name) + "' (expected ibr or oc)");
}

HumanModel HumanModel::defaults(HumanVariant variant) {
  HumanModel m;
  m.variant = variant;
  if (variant == HumanVariant::kIbr) {
    m.planner = human_ibr_config();
    m.robot_model = ours_config();
  } else {
    m.planner = oc_config();
    m.robot_model = oc_config();
  }
  return m;
}

std::string HumanModel::policy_name() const { return variant == HumanVariant::kIbr ? "human_ibr" : "human_oc"; }

json HumanModel::policy_config() const { return {{"planner", to_json(planner)}, {"model", to_json(robot_model)}}; }

int Scenario::steps() const { return static_cast<int>(std::lround(duration / dt)); }

void Scenario::validate() const {
  if (schema_version != kScenarioSchemaVersion) throw std::invalid_argument("scenario: unsupported schema version");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("scenario: dt must be positive");
  if (!(duration > 0.0) || std::abs(duration / dt - steps()) > 1e-9 * std::max(1.0, duration / dt)) {
    throw std::invalid_argument("scenario: duration must be a positive multiple of dt");
  }
  if (agents.empty()) throw std::invalid_argument("scenario: no agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentSpec& a = agents[i];
    if (a.id.empty()) throw std::invalid_argument("scenario: empty agent id");
    for (std::size_t j = 0; j < i; ++j) {
      if (agents[j].id == a.id) throw std::invalid_argument("scenario: duplicate agent id '" + a.id + "'");
    }
    if (!a.start.finite() || !a.goal.allFinite()) throw std::invalid_argument("scenario: non-finite agent " + a.id);
    if (a.noise.sigma_omega < 0.0 || a.noise.sigma_a < 0.0) throw std::invalid_argument("scenario: negative noise");
  }
  for (const Wall& w : walls) {
    if (std::abs(w.normal.norm() - 1.0) > 1e-9) throw std::invalid_argument("scenario: wall normal must be unit");
  }
  limits.validate();
}

const AgentSpec* Scenario::find(std::string_view id) const {
  for (const AgentSpec& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

json to_json(const Scenario& s) {
  json agents = json::array();
  for (const AgentSpec& a : s.agents) {
    agents.push_back({{"id", a.id},
                      {"role", a.role},
                      {"start", state_json(a.start)},
                      {"goal", vec(a.goal)},
                      {"policy", a.policy},
                      {"config", a.config},
                      {"noise", {{"omega", a.noise.sigma_omega}, {"a", a.noise.sigma_a}}}});
  }
  json peripherals = json::array();
  for (const Peripheral& p : s.peripherals) peripherals.push_back({{"position", vec(p.position)}, {"velocity", vec(p.velocity)}});
  json walls = json::array();
  for (const Wall& w : s.walls) walls.push_back({{"normal", vec(w.normal)}, {"offset", w.offset}});
  return {{"schema_version", s.schema_version},
          {"name", s.name},
          {"seed", s.seed},
          {"dt", s.dt},
          {"duration", s.duration},
          {"limits", to_json(s.limits)},
          {"agents", std::move(agents)},
          {"peripherals", std::move(peripherals)},
          {"walls", std::move(walls)}};
}

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) throw ConfigError("scenario: missing schema_version");
  if (doc.at("schema_version") != kScenarioSchemaVersion) {
    throw ConfigError("scenario: schema_version " + doc.at("schema_version").dump() + " is not supported (expected " +
                      std::to_string(kScenarioSchemaVersion) + ")");
  }
  static const std::set<std::string> known{"schema_version", "name", "seed", "dt", "duration",
                                           "limits", "agents", "peripherals", "walls"};
  for (const auto& [key, unused] : doc.items()) {
    if (!known.count(key)) throw ConfigError("scenario: unknown key '" + key + "'");
  }
  Scenario s;
  try {
    s.name = doc.value("name", s.name);
    s.seed = doc.value("seed", s.seed);
    s.dt = doc.value("dt", s.dt);
    s.duration = doc.value("duration", s.duration);
    if (doc.contains("limits")) s.limits = limits_from_json(doc.at("limits"));
    for (const json& a : doc.at("agents")) {
      AgentSpec spec;
      spec.id = a.at("id").get<std::string>();
      spec.role = a.value("role", spec.role);
      spec.start = state_from(a.at("start"));
      spec.goal = vec_from(a.at("goal"), "goal");
      spec.policy = a.value("policy", spec.policy);
      spec.config = a.value("config", json::object());
      if (a.contains("noise")) {
        spec.noise.sigma_omega = a.at("noise").value("omega", 0.0);
        spec.noise.sigma_a = a.at("noise").value("a", 0.0);
      }
      s.agents.push_back(std::move(spec));
    }
    for (const json& p : doc.value("peripherals", json::array())) {
      s.peripherals.push_back({vec_from(p.at("position"), "position"), vec_from(p.at("velocity"), "velocity")});
    }
    for (const json& w : doc.value("walls", json::array())) {
      s.walls.push_back({vec_from(w.at("normal"), "normal"), w.at("offset").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  try {
    s.validate();
    for (const AgentSpec& a : s.agents) make_policy(a.policy, a.config, s.limits);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("scenario file " + path + " is not valid JSON");
  return scenario_from_json(doc);
}

json default_policy_config(const std::string& name) {
  if (name == "ours") return {{"planner", to_json(ours_config())}, {"model", to_json(ours_config())}};
  if (name == "oc") return {{"planner", to_json(oc_config())}, {"model", to_json(oc_config())}};
  if (name == "vibr") return {{"planner", to_json(vibr_config())}, {"model", to_json(vibr_config())}};
  if (name == "sfm") return {{"sfm", to_json(SfmParams{})}};
  if (name == "reactive_cv") return {{"reactive", to_json(ReactiveParams{})}};
  if (name == "human_ibr") return HumanModel::defaults(HumanVariant::kIbr).policy_config();
  if (name == "human_oc") return HumanModel::defaults(HumanVariant::kOc).policy_config();
  throw ConfigError("unknown policy '" + name + "'");
}

std::unique_ptr<Policy> make_policy(const std::string& name, const json& config, const Limits& limits) {
  auto planner_policy = [&](const std::string& label, const PlannerConfig& base, const PlannerConfig& model) {
    check_sections(config, {"planner", "model"}, name);
    return std::make_unique<PlannerPolicy>(name, label, planner_config_from_json(section(config, "planner"), base),
                                           planner_config_from_json(section(config, "model"), model));
  };
  if (name == "ours") return planner_policy("Ours", ours_config(), ours_config());
  if (name == "oc") return planner_policy("OC", oc_config(), oc_config());
  if (name == "vibr") return planner_policy("vIBR", vibr_config(), vibr_config());
  if (name == "human_ibr") {
    const HumanModel m = HumanModel::defaults(HumanVariant::kIbr);
    return planner_policy("Human-IBR", m.planner, m.robot_model);
  }
  if (name == "human_oc") {
    const HumanModel m = HumanModel::defaults(HumanVariant::kOc);
    return planner_policy("Human-OC", m.planner, m.robot_model);
  }
  if (name == "sfm") {
    check_sections(config, {"sfm"}, name);
    return std::make_unique<SfmPolicy>(sfm_params_from_json(section(config, "sfm")), limits);
  }
  if (name == "reactive_cv") {
    check_sections(config, {"reactive"}, name);
    return std::make_unique<ReactiveCvPolicy>(reactive_params_from_json(section(config, "reactive")), limits);
  }
  throw ConfigError("unknown policy '" + name + "'");
}

Scenario generate_headon(std::uint64_t seed, double relative_heading, const HumanModel& human,
                         const std::string& robot_policy, const HeadOnOptions& o) {
  if (std::abs(relative_heading) > std::numbers::pi / 4 + 1e-12) {
    throw std::invalid_argument("generate_headon: relative heading must lie in [-pi/4, pi/4]");
  }
  Scenario s;
  s.name = "headon";
  s.seed = seed;
  s.dt = o.dt;
  s.duration = o.duration;

  AgentSpec robot;
  robot.id = "robot";
  robot.role = "robot";
  robot.start = {0.0, 0.0, 0.0, o.start_speed};
  robot.goal = {o.goal_distance, 0.0};
  robot.policy = robot_policy;

  // The human's straight path passes through the midpoint of the robot's start and the point `separation` ahead.
  const Vec2 mid(0.5 * o.separation, 0.0);
  const double heading = std::numbers::pi + relative_heading + o.tie_break;
  const Vec2 dir(std::cos(heading), std::sin(heading));
  AgentSpec h;
  h.id = "human";
  h.role = "human";
  const Vec2 start = mid - 0.5 * o.separation * dir;
  h.start = {start.x(), start.y(), heading, o.start_speed};
  h.goal = start + o.goal_distance * dir;
  h.policy = human.policy_name();
  h.config = human.policy_config();
  h.noise = human.noise;

  s.agents = {std::move(robot), std::move(h)};
  return s;
}

Observation observe(const Scenario& scenario, std::span<const AgentState> states, std::size_t self, int tick) {
  Observation obs;
  obs.self = states[self];
  obs.goal = scenario.agents[self].goal;
  obs.dt = scenario.dt;
  obs.walls = scenario.walls;
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (j != self) obs.others.push_back({states[j], scenario.agents[j].goal, true});
  }
  const double time = tick * scenario.dt;
  for (const Peripheral& p : scenario.peripherals) obs.peripherals.push_back({p.at(time), p.velocity});
  return obs;
}

EpisodeLog run_episode(const Scenario& scenario, EpisodeTiming* timing) {
  scenario.validate();
  const std::size_t n = scenario.agents.size();
  const int steps = scenario.steps();

  std::vector<std::unique_ptr<Policy>> policies;
  std::vector<std::mt19937_64> rngs;
  EpisodeLog log;
  log.seed = scenario.seed;
  log.scenario = to_json(scenario);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentSpec& spec = scenario.agents[i];
    policies.push_back(make_policy(spec.policy, spec.config, scenario.limits));
    rngs.push_back(agent_rng(scenario.seed, i));
    AgentLog a;
    a.id = spec.id;
    a.role = spec.role;
    a.policy = spec.policy;
    a.goal = spec.goal;
    a.trajectory.dt = scenario.dt;
    a.trajectory.states.push_back(spec.start);
    log.agents.push_back(std::move(a));
  }
  if (timing) {
    timing->agent_ids.clear();
    for (const AgentSpec& spec : scenario.agents) timing->agent_ids.push_back(spec.id);
    timing->solve_times.assign(n, {});
  }

  std::vector<AgentState> states(n);
  std::vector<AgentControl> held(n);
  for (std::size_t i = 0; i < n; ++i) states[i] = scenario.agents[i].start;

  for (int tick = 0; tick < steps; ++tick) {
    std::vector<AgentControl> controls(n);
    for (std::size_t i = 0; i < n; ++i) {
      const PolicyOutput out = policies[i]->act(observe(scenario, states, i, tick));
      StepRecord rec{out.diagnostics.scp_iterations, out.diagnostics.slack_sum, out.diagnostics.inconvenience,
                     out.diagnostics.degraded, out.diagnostics.failed};
      AgentControl u = out.diagnostics.failed ? held[i] : out.control;
      log.flagged = log.flagged || out.diagnostics.failed;
      const NoiseModel& noise = scenario.agents[i].noise;
      if (noise.sigma_omega > 0.0) u.omega += std::normal_distribution<double>(0.0, noise.sigma_omega)(rngs[i]);
      if (noise.sigma_a > 0.0) u.a += std::normal_distribution<double>(0.0, noise.sigma_a)(rngs[i]);
      controls[i] = scenario.limits.clamp(u);
      held[i] = controls[i];
      log.agents[i].steps.push_back(rec);
      if (timing) timing->solve_times[i].push_back(out.diagnostics.solve_time);
    }
    for (std::size_t i = 0; i < n; ++i) {
      states[i] = step(states[i], controls[i], scenario.dt, scenario.limits);
      log.agents[i].trajectory.controls.push_back(controls[i]);
      log.agents[i].trajectory.states.push_back(states[i]);
    }
  }
  return log;
}

const AgentLog* EpisodeLog::find(std::string_view id) const {
  for (const AgentLog& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

const AgentLog* EpisodeLog::find_role(std::string_view role) const {
  for (const AgentLog& a : agents) {
    if (a.role == role) return &a;
  }
  return nullptr;
}

double EpisodeTiming::mean(std::string_view agent_id) const {
  for (std::size_t i = 0; i < agent_ids.size(); ++i) {
    if (agent_ids[i] != agent_id || solve_times[i].empty()) continue;
    double total = 0.0;
    for (double t : solve_times[i]) total += t;
    return total / static_cast<double>(solve_times[i].size());
  }
  return 0.0;
}

json to_json(const EpisodeLog& log) {
  json agents = json::array();
  for (const AgentLog& a : log.agents) {
    json states = json::array();
    for (const AgentState& s : a.trajectory.states) states.push_back({s.x, s.y, s.theta, s.v});
    json controls = json::array();
    for (const AgentControl& u : a.trajectory.controls) controls.push_back({u.omega, u.a});
    json steps = json::array();
    for (const StepRecord& r : a.steps) {
      steps.push_back({{"scp_iterations", r.scp_iterations},
                       {"slack_sum", r.slack_sum},
                       {"inconvenience", r.inconvenience},
                       {"degraded", r.degraded},
                       {"failed", r.failed}});
    }
    agents.push_back({{"id", a.id},
                      {"role", a.role},
                      {"policy", a.policy},
                      {"goal", vec(a.goal)},
                      {"dt", a.trajectory.dt},
                      {"states", std::move(states)},
                      {"controls", std::move(controls)},
                      {"steps", std::move(steps)}});
  }
  return {{"schema_version", log.schema_version},
          {"seed", log.seed},
          {"flagged", log.flagged},
          {"scenario", log.scenario},
          {"agents", std::move(agents)}};
}

EpisodeLog episode_log_from_json(const json& doc) {
  EpisodeLog log;
  try {
    if (doc.at("schema_version") != kLogSchemaVersion) throw ConfigError("episode log: unsupported schema_version");
    log.seed = doc.at("seed").get<std::uint64_t>();
    log.flagged = doc.at("flagged").get<bool>();
    log.scenario = doc.at("scenario");
    for (const json& a : doc.at("agents")) {
      AgentLog al;
      al.id = a.at("id").get<std::string>();
      al.role = a.at("role").get<std::string>();
      al.policy = a.at("policy").get<std::string>();
      al.goal = vec_from(a.at("goal"), "goal");
      al.trajectory.dt = a.at("dt").get<double>();
      for (const json& s : a.at("states")) {
        al.trajectory.states.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>(),
                                        s.at(3).get<double>()});
      }
      for (const json& u : a.at("controls")) al.trajectory.controls.push_back({u.at(0).get<double>(), u.at(1).get<double>()});
      for (const json& r : a.at("steps")) {
        al.steps.push_back({r.at("scp_iterations").get<int>(), r.at("slack_sum").get<double>(),
                            r.at("inconvenience").get<double>(), r.at("degraded").get<bool>(),
                            r.at("failed").get<bool>()});
      }
      if (!al.trajectory.well_formed()) throw ConfigError("episode log: agent " + al.id + " has a malformed trajectory");
      log.agents.push_back(std::move(al));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("episode log: ") + e.what());
  }
  if (log.agents.empty()) throw ConfigError("episode log: no agents");
  return log;
}

json to_json(const EpisodeTiming& timing) {
  json agents = json::object();
  for (std::size_t i = 0; i < timing.agent_ids.size(); ++i) agents[timing.agent_ids[i]] = timing.solve_times[i];
  return {{"solve_time_seconds", std::move(agents)}};
}

void write_csv(const EpisodeLog& log, std::ostream& out) {
  out << "t,agent_id,x,y,theta,v,omega,a\n";
  char buf[256];
  for (const AgentLog& a : log.agents) {
    const Trajectory& tr = a.trajectory;
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const AgentState& s = tr.states[k];
      std::snprintf(buf, sizeof buf, "%.10g,%s,%.17g,%.17g,%.17g,%.17g,", static_cast<double>(k) * tr.dt, a.id.c_str(),
                    s.x, s.y, s.theta, s.v);
      out << buf;
      if (k < tr.controls.size()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", tr.controls[k].omega, tr.controls[k].a);
        out << buf;
      } else {
        out << ',';
      }
      out << '\n';
    }
  }
}

std::vector<BatchEntry> run_batch(const ScenarioGenerator& generator, int n, int parallelism,
                                  std::uint64_t seed_base) {
  if (n < 1) throw std::invalid_argument("run_batch: need at least one episode");
  std::vector<BatchEntry> entries(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      BatchEntry& e = entries[static_cast<std::size_t>(k)];
      e.seed = seed_base + static_cast<std::uint64_t>(k);
      try {
        e.log = run_episode(generator(e.seed), &e.timing);
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  };
  const int threads = std::clamp(parallelism, 1, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return entries;
}

double headon_relative_heading(std::uint64_t seed, double max_relative_heading) {
  std::mt19937_64 rng(seed);
  return std::uniform_real_distribution<double>(-max_relative_heading, max_relative_heading)(rng);
}

ScenarioGenerator headon_generator(const std::string& robot_policy, const HeadOnBatchOptions& options) {
  if (options.human_models.empty()) throw std::invalid_argument("headon_generator: no human model");
  return [robot_policy, options](std::uint64_t seed) {
    const HumanVariant variant = options.human_models[seed % options.human_models.size()];
    return generate_headon(seed, headon_relative_heading(seed, options.max_relative_heading),
                           HumanModel::defaults(variant), robot_policy, options.scene);
  };
}

}  // namespace socnav
