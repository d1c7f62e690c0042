#pragma once

/**
 * @file hitl.hpp
 * @brief Human-in-the-loop session logic, independent of any transport.
 *
 * Wire protocol (JSON text frames, every message carries "type" and "schema"):
 *
 *   client -> server
 *     {"type":"hello","schema":1,"client":"<name>"}
 *     {"type":"input","schema":1,"t":<client time s>,"keys":<bits>}
 *     {"type":"input","schema":1,"t":<client time s>,"omega":<rad/s>,"a":<m/s^2>}
 *
 *   server -> client
 *     {"type":"hello","schema":1,"accepted":true,"human_id":"human","dt":0.1,"limits":{...}}
 *     {"type":"hello","schema":1,"accepted":false,"reason":"..."}     then the server closes
 *     {"type":"state","schema":1,"tick":k,"time":s,"agents":[...],"preview":[[x,y],...],
 *      "goals":{"id":[x,y]},"walls":[{"normal":[nx,ny],"offset":o}],"collision_radius":1.0}
 *     {"type":"pause","schema":1,"reason":"no_client"|"stale_input"|"finished"}
 *
 * Key bits: up 1, down 2, left 4, right 8. Up/down command the acceleration
 * limits, left/right the turn-rate limits; opposite keys cancel.
 */

#include "socnav/simulation.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace socnav::hitl {

inline constexpr int kProtocolSchema = 1;
inline constexpr int kRecordingSchema = 1;

enum Key : unsigned { kUp = 1, kDown = 2, kLeft = 4, kRight = 8 };

/// A client message that cannot be used: bad JSON, unknown type, wrong schema on input.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HelloMsg {
  int schema = kProtocolSchema;
  std::string client;
};

struct InputMsg {
  double client_time = 0.0;
  /// Either a key bitfield or an explicit command.
  unsigned keys = 0;
  std::optional<AgentControl> command;
};

using ClientMessage = std::variant<HelloMsg, InputMsg>;

/// Hello messages parse whatever their schema so the caller can refuse them politely.
ClientMessage parse_client_message(std::string_view text);

AgentControl keys_to_control(unsigned keys, const Limits& limits);
/// Command requested by an input message, clamped into the limits.
AgentControl input_control(const InputMsg& msg, const Limits& limits);

nlohmann::json hello_reply(std::string_view human_id, double dt, const Limits& limits);
nlohmann::json hello_refusal(std::string_view reason);
nlohmann::json pause_message(std::string_view reason);

struct AgentView {
  std::string id;
  std::string role;  ///< "robot", "human" or "peripheral"
  AgentState state;
};

struct WorldState {
  int tick = 0;
  double time = 0.0;
  std::vector<AgentView> agents;
  std::vector<Vec2> preview;  ///< robot plan positions, T + 2 points
  std::vector<std::pair<std::string, Vec2>> goals;
  std::vector<Wall> walls;
  double collision_radius = 1.0;
};

nlohmann::json to_json(const WorldState& state);

/// Latest-input slot shared by the ingestion side and the simulation loop.
class InputSlot {
 public:
  using Clock = std::chrono::steady_clock;

  void put(const InputMsg& msg, Clock::time_point received);
  /// Starts the staleness clock without an input, e.g. on a new client.
  void touch(Clock::time_point now);
  void clear();
  std::optional<InputMsg> latest() const;
  /// Seconds since the last put or touch; empty if neither happened.
  std::optional<double> age(Clock::time_point now) const;

 private:
  mutable std::mutex mutex_;
  std::optional<InputMsg> latest_;
  std::optional<Clock::time_point> stamp_;
};

/// Why the loop must not advance, or empty when it may.
std::optional<std::string> pause_reason(bool client_connected, std::optional<double> input_age,
                                        double stale_timeout);

struct SessionOptions {
  std::string human_id = "human";
  double tick_budget = 0.1;    ///< [s] wall time the robot planner may use per tick
  double stale_timeout = 1.0;  ///< [s]
};

struct TickRecord {
  AgentControl human;
  bool overrun = false;  ///< the robot planner missed the tick budget and the robot held its control

  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

/// One human-driven agent and one planner-driven robot, advanced tick by tick.
class Session {
 public:
  /// Throws std::invalid_argument unless the scenario has exactly the human agent and one other agent.
  Session(Scenario scenario, SessionOptions options = {});

  /// Live tick: the planner's wall time decides whether the robot holds its previous control.
  const WorldState& advance(const AgentControl& human_command);
  /// Replayed tick: the recorded overrun flag decides.
  const WorldState& replay(const TickRecord& record);

  bool finished() const { return tick_ >= scenario_.steps(); }
  int tick() const { return tick_; }
  int overruns() const { return overruns_; }
  const WorldState& state() const { return view_; }
  const EpisodeLog& log() const { return log_; }
  const std::vector<TickRecord>& recording() const { return recording_; }
  const Scenario& scenario() const { return scenario_; }
  const SessionOptions& options() const { return options_; }
  /// Wall-clock robot solve times per tick, never part of the log.
  const std::vector<double>& solve_times() const { return solve_times_; }

 private:
  const WorldState& advance(const AgentControl& human_command, std::optional<bool> forced_overrun);
  void refresh_view(std::vector<Vec2> preview);

  Scenario scenario_;
  SessionOptions options_;
  std::size_t human_ = 0;
  std::size_t robot_ = 0;
  std::unique_ptr<Policy> robot_policy_;
  std::vector<AgentState> states_;
  AgentControl held_;
  int tick_ = 0;
  int overruns_ = 0;
  EpisodeLog log_;
  WorldState view_;
  std::vector<TickRecord> recording_;
  std::vector<double> solve_times_;
};

/// Input and outcome of every tick; enough to rebuild the session log headlessly.
struct Recording {
  int schema = kRecordingSchema;
  nlohmann::json scenario;
  SessionOptions options;
  std::vector<TickRecord> ticks;
  bool truncated = false;  ///< set by the reader when the stream ended in a partial or corrupt line
};

Recording make_recording(const Session& session);
/// JSON lines: a header line, then one line per tick.
void write_recording(const Recording& recording, std::ostream& out);
/// Throws ProtocolError when the header is unusable; stops at the first bad tick line.
Recording read_recording(std::istream& in);

/// Re-runs the recorded ticks. The log is flagged when the recording was truncated.
EpisodeLog replay(const Recording& recording);

}  // namespace socnav::hitl
