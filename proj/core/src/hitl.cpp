#include "socnav/hitl.hpp"

#include "socnav/config_io.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace socnav::hitl {

using nlohmann::json;

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

double seconds(std::chrono::steady_clock::duration d) { return std::chrono::duration<double>(d).count(); }

bool is_planner_policy(const std::string& name) { return name == "ours" || name == "oc" || name == "vibr"; }

}  // namespace

ClientMessage parse_client_message(std::string_view text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ProtocolError("message is not a JSON object");
  try {
    const std::string type = doc.at("type").get<std::string>();
    const int schema = doc.at("schema").get<int>();
    if (type == "hello") return HelloMsg{schema, doc.value("client", std::string())};
    if (type != "input") throw ProtocolError("unexpected message type '" + type + "'");
    if (schema != kProtocolSchema) throw ProtocolError("input schema " + std::to_string(schema) + " is not supported");
    InputMsg msg;
    msg.client_time = doc.value("t", 0.0);
    if (doc.contains("omega") || doc.contains("a")) {
      const AgentControl u{doc.at("omega").get<double>(), doc.at("a").get<double>()};
      if (!u.finite()) throw ProtocolError("input command is not finite");
      msg.command = u;
    } else {
      msg.keys = doc.at("keys").get<unsigned>();
    }
    return msg;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
}

AgentControl keys_to_control(unsigned keys, const Limits& limits) {
  AgentControl u;
  if (keys & kUp) u.a += limits.accel.hi;
  if (keys & kDown) u.a += limits.accel.lo;
  if (keys & kLeft) u.omega += limits.omega.hi;
  if (keys & kRight) u.omega += limits.omega.lo;
  return limits.clamp(u);
}

AgentControl input_control(const InputMsg& msg, const Limits& limits) {
  return msg.command ? limits.clamp(*msg.command) : keys_to_control(msg.keys, limits);
}

json hello_reply(std::string_view human_id, double dt, const Limits& limits) {
  return {{"type", "hello"}, {"schema", kProtocolSchema}, {"accepted", true},
          {"human_id", human_id}, {"dt", dt}, {"limits", to_json(limits)}};
}

json hello_refusal(std::string_view reason) {
  return {{"type", "hello"}, {"schema", kProtocolSchema}, {"accepted", false}, {"reason", reason}};
}

json pause_message(std::string_view reason) {
  return {{"type", "pause"}, {"schema", kProtocolSchema}, {"reason", reason}};
}

json to_json(const WorldState& s) {
  json agents = json::array();
  for (const AgentView& a : s.agents) {
    agents.push_back({{"id", a.id}, {"role", a.role}, {"x", a.state.x}, {"y", a.state.y},
                      {"theta", a.state.theta}, {"v", a.state.v}});
  }
  json preview = json::array();
  for (const Vec2& p : s.preview) preview.push_back(vec(p));
  json goals = json::object();
  for (const auto& [id, g] : s.goals) goals[id] = vec(g);
  json walls = json::array();
  for (const Wall& w : s.walls) walls.push_back({{"normal", vec(w.normal)}, {"offset", w.offset}});
  return {{"type", "state"},   {"schema", kProtocolSchema}, {"tick", s.tick},
          {"time", s.time},    {"agents", std::move(agents)}, {"preview", std::move(preview)},
          {"goals", std::move(goals)}, {"walls", std::move(walls)}, {"collision_radius", s.collision_radius}};
}

void InputSlot::put(const InputMsg& msg, Clock::time_point received) {
  std::lock_guard lock(mutex_);
  latest_ = msg;
  stamp_ = received;
}

void InputSlot::touch(Clock::time_point now) {
  std::lock_guard lock(mutex_);
  stamp_ = now;
}

void InputSlot::clear() {
  std::lock_guard lock(mutex_);
  latest_.reset();
  stamp_.reset();
}

std::optional<InputMsg> InputSlot::latest() const {
  std::lock_guard lock(mutex_);
  return latest_;
}

std::optional<double> InputSlot::age(Clock::time_point now) const {
  std::lock_guard lock(mutex_);
  if (!stamp_) return std::nullopt;
  return seconds(now - *stamp_);
}

std::optional<std::string> pause_reason(bool client_connected, std::optional<double> input_age,
                                        double stale_timeout) {
  if (!client_connected) return "no_client";
  if (input_age && *input_age > stale_timeout) return "stale_input";
  return std::nullopt;
}

Session::Session(Scenario scenario, SessionOptions options)
    : scenario_(std::move(scenario)), options_(std::move(options)) {
  scenario_.validate();
  if (!(options_.tick_budget > 0.0) || !(options_.stale_timeout > 0.0)) {
    throw std::invalid_argument("session: tick budget and stale timeout must be positive");
  }
  if (scenario_.agents.size() != 2) throw std::invalid_argument("session: need exactly one human and one robot agent");
  const AgentSpec* human = scenario_.find(options_.human_id);
  if (!human) throw std::invalid_argument("session: no agent with id '" + options_.human_id + "'");
  human_ = static_cast<std::size_t>(human - scenario_.agents.data());
  robot_ = 1 - human_;
  const AgentSpec& robot = scenario_.agents[robot_];
  if (!is_planner_policy(robot.policy)) {
    throw std::invalid_argument("session: robot policy '" + robot.policy + "' is not a planner");
  }
  robot_policy_ = make_policy(robot.policy, robot.config, scenario_.limits);

  log_.seed = scenario_.seed;
  log_.scenario = to_json(scenario_);
  for (std::size_t i = 0; i < scenario_.agents.size(); ++i) {
    const AgentSpec& spec = scenario_.agents[i];
    AgentLog a;
    a.id = spec.id;
    a.role = spec.role;
    a.policy = i == human_ ? "human_input" : spec.policy;
    a.goal = spec.goal;
    a.trajectory.dt = scenario_.dt;
    a.trajectory.states.push_back(spec.start);
    log_.agents.push_back(std::move(a));
    states_.push_back(spec.start);
  }
  // The opening state already shows what the robot intends.
  refresh_view(robot_policy_->act(observe(scenario_, states_, robot_, 0)).diagnostics.preview);
}

const WorldState& Session::advance(const AgentControl& human_command) { return advance(human_command, std::nullopt); }

const WorldState& Session::replay(const TickRecord& record) { return advance(record.human, record.overrun); }

const WorldState& Session::advance(const AgentControl& human_command, std::optional<bool> forced_overrun) {
  if (finished()) throw std::logic_error("session: episode already finished");
  const AgentControl human = scenario_.limits.clamp(human_command);
  if (!human.finite()) throw std::invalid_argument("session: non-finite human command");

  const auto started = std::chrono::steady_clock::now();
  const PolicyOutput out = robot_policy_->act(observe(scenario_, states_, robot_, tick_));
  const double elapsed = seconds(std::chrono::steady_clock::now() - started);
  solve_times_.push_back(elapsed);
  const bool overrun = forced_overrun ? *forced_overrun : elapsed > options_.tick_budget;
  overruns_ += overrun ? 1 : 0;

  AgentControl robot = held_;
  if (out.diagnostics.failed) {
    log_.flagged = true;
  } else if (!overrun) {
    robot = out.control;
  }
  held_ = robot;

  std::vector<AgentControl> controls(2);
  controls[human_] = human;
  controls[robot_] = robot;
  log_.agents[robot_].steps.push_back({out.diagnostics.scp_iterations, out.diagnostics.slack_sum,
                                       out.diagnostics.inconvenience, out.diagnostics.degraded,
                                       out.diagnostics.failed});
  log_.agents[human_].steps.push_back({});
  for (std::size_t i = 0; i < 2; ++i) {
    states_[i] = step(states_[i], controls[i], scenario_.dt, scenario_.limits);
    log_.agents[i].trajectory.controls.push_back(controls[i]);
    log_.agents[i].trajectory.states.push_back(states_[i]);
  }
  recording_.push_back({human, overrun});
  ++tick_;
  refresh_view(out.diagnostics.preview);
  return view_;
}

void Session::refresh_view(std::vector<Vec2> preview) {
  view_.tick = tick_;
  view_.time = tick_ * scenario_.dt;
  view_.agents.clear();
  view_.goals.clear();
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const AgentSpec& spec = scenario_.agents[i];
    view_.agents.push_back({spec.id, i == human_ ? "human" : "robot", states_[i]});
    view_.goals.emplace_back(spec.id, spec.goal);
  }
  for (std::size_t k = 0; k < scenario_.peripherals.size(); ++k) {
    const Peripheral& p = scenario_.peripherals[k];
    const Vec2 at = p.at(view_.time);
    const double heading = p.velocity.norm() > 0.0 ? std::atan2(p.velocity.y(), p.velocity.x()) : 0.0;
    view_.agents.push_back({"peripheral_" + std::to_string(k), "peripheral", {at.x(), at.y(), heading, p.velocity.norm()}});
  }
  view_.preview = std::move(preview);
  view_.walls = scenario_.walls;
  if (const auto* planner = dynamic_cast<const PlannerPolicy*>(robot_policy_.get())) {
    view_.collision_radius = planner->config().collision_radius;
  }
}

Recording make_recording(const Session& session) {
  Recording r;
  r.scenario = to_json(session.scenario());
  r.options = session.options();
  r.ticks = session.recording();
  return r;
}

void write_recording(const Recording& r, std::ostream& out) {
  const json header{{"type", "recording"},
                    {"schema", r.schema},
                    {"human_id", r.options.human_id},
                    {"tick_budget", r.options.tick_budget},
                    {"stale_timeout", r.options.stale_timeout},
                    {"scenario", r.scenario}};
  out << header.dump() << '\n';
  for (std::size_t k = 0; k < r.ticks.size(); ++k) {
    const TickRecord& t = r.ticks[k];
    out << json{{"tick", k}, {"omega", t.human.omega}, {"a", t.human.a}, {"overrun", t.overrun}}.dump() << '\n';
  }
}

Recording read_recording(std::istream& in) {
  Recording r;
  std::string line;
  if (!std::getline(in, line)) throw ProtocolError("recording: empty stream");
  const json header = json::parse(line, nullptr, false);
  try {
    if (header.is_discarded() || header.at("type") != "recording") throw ProtocolError("recording: bad header");
    if (header.at("schema") != kRecordingSchema) throw ProtocolError("recording: unsupported schema");
    r.scenario = header.at("scenario");
    r.options.human_id = header.at("human_id").get<std::string>();
    r.options.tick_budget = header.at("tick_budget").get<double>();
    r.options.stale_timeout = header.at("stale_timeout").get<double>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("recording: ") + e.what());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json t = json::parse(line, nullptr, false);
    try {
      if (t.is_discarded() || t.at("tick").get<std::size_t>() != r.ticks.size()) {
        r.truncated = true;
        break;
      }
      r.ticks.push_back({{t.at("omega").get<double>(), t.at("a").get<double>()}, t.at("overrun").get<bool>()});
    } catch (const json::exception&) {
      r.truncated = true;
      break;
    }
  }
  return r;
}

EpisodeLog replay(const Recording& recording) {
  Session session(scenario_from_json(recording.scenario), recording.options);
  for (const TickRecord& t : recording.ticks) {
    if (session.finished()) break;
    session.replay(t);
  }
  EpisodeLog log = session.log();
  log.flagged = log.flagged || recording.truncated;
  return log;
}

}  // namespace socnav::hitl
