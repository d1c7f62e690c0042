#pragma once

/**
 * @file simulation.hpp
 * @brief Scenarios, simulated humans, and the receding-horizon episode loop.
 *
 * Each tick every agent observes the world as it was at the start of the tick,
 * its policy picks a control, human controls get seeded Gaussian noise, and all
 * controls are applied at once.
 */

#include "socnav/baselines.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace socnav {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kLogSchemaVersion = 1;

struct NoiseModel {
  double sigma_omega = 0.0;  ///< [rad/s]
  double sigma_a = 0.0;      ///< [m/s^2]
};

enum class HumanVariant { kIbr, kOc };

const char* to_string(HumanVariant variant);
HumanVariant human_variant_from_string(std::string_view name);

/// Simulated human: its own planner, its model of the robot, and executed-control noise.
struct HumanModel {
  HumanVariant variant = HumanVariant::kIbr;
  PlannerConfig planner;
  PlannerConfig robot_model;
  NoiseModel noise{0.05, 0.05};

  /// Budget 0.25 and no markup for the IBR human; the OC configuration for the OC human.
  static HumanModel defaults(HumanVariant variant);
  /// Policy name and config document for an agent driven by this model.
  std::string policy_name() const;
  nlohmann::json policy_config() const;
};

struct AgentSpec {
  std::string id;
  std::string role = "robot";  ///< "robot" or "human"; metrics group by role
  AgentState start;
  Vec2 goal = Vec2::Zero();
  std::string policy = "ours";
  /// Optional sections "planner", "model", "sfm", "reactive"; absent keys keep the policy defaults.
  nlohmann::json config = nlohmann::json::object();
  NoiseModel noise;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "custom";
  std::vector<AgentSpec> agents;
  std::vector<Peripheral> peripherals;
  std::vector<Wall> walls;
  double duration = 5.0;  ///< [s]
  double dt = 0.1;        ///< [s]
  std::uint64_t seed = 0;
  Limits limits;

  /// Number of ticks, duration / dt.
  int steps() const;
  /// Throws std::invalid_argument.
  void validate() const;
  const AgentSpec* find(std::string_view id) const;
};

nlohmann::json to_json(const Scenario& scenario);
/// Throws ConfigError on a missing or mismatched schema version or malformed fields.
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

/// "ours", "vibr", "oc", "sfm", "reactive_cv" plus the simulated-human models "human_ibr" and "human_oc".
std::unique_ptr<Policy> make_policy(const std::string& name, const nlohmann::json& config, const Limits& limits);

/// Canonical per-policy configuration as recorded in manifests.
nlohmann::json default_policy_config(const std::string& name);

struct HeadOnOptions {
  double separation = 10.0;   ///< start distance between the agents [m]
  double goal_distance = 10.0;
  double start_speed = 1.0;
  /// Added to the human heading so an exactly symmetric scene still has a preferred side.
  double tie_break = 0.0;
  double duration = 5.0;
  double dt = 0.1;
};

/// Robot at the origin heading east, human facing it with `relative_heading` offset.
/// Both straight paths pass through the midpoint, so they always cross.
Scenario generate_headon(std::uint64_t seed, double relative_heading, const HumanModel& human,
                         const std::string& robot_policy, const HeadOnOptions& options = {});

struct StepRecord {
  int scp_iterations = 0;
  double slack_sum = 0.0;
  double inconvenience = 0.0;
  bool degraded = false;
  bool failed = false;
};

struct AgentLog {
  std::string id;
  std::string role;
  std::string policy;
  Vec2 goal = Vec2::Zero();
  Trajectory trajectory;
  std::vector<StepRecord> steps;  ///< one per executed control
};

struct EpisodeLog {
  int schema_version = kLogSchemaVersion;
  std::uint64_t seed = 0;
  nlohmann::json scenario;  ///< snapshot of the scenario that produced the log
  std::vector<AgentLog> agents;
  bool flagged = false;  ///< a planner failed at some tick and its agent held its previous control

  const AgentLog* find(std::string_view id) const;
  const AgentLog* find_role(std::string_view role) const;
};

/// Wall-clock solve times per agent and tick. Kept apart from the log so logs stay reproducible.
struct EpisodeTiming {
  std::vector<std::string> agent_ids;
  std::vector<std::vector<double>> solve_times;

  double mean(std::string_view agent_id) const;
};

/// What agent `self` sees at `tick`: the other agents' current states and goals, peripherals
/// propagated to the current time, walls.
Observation observe(const Scenario& scenario, std::span<const AgentState> states, std::size_t self, int tick);

EpisodeLog run_episode(const Scenario& scenario, EpisodeTiming* timing = nullptr);

nlohmann::json to_json(const EpisodeLog& log);
EpisodeLog episode_log_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const EpisodeTiming& timing);

/// One row per agent per state: t,agent_id,x,y,theta,v,omega,a. The last state has empty controls.
void write_csv(const EpisodeLog& log, std::ostream& out);

struct BatchEntry {
  std::uint64_t seed = 0;
  std::optional<EpisodeLog> log;
  EpisodeTiming timing;
  std::string error;  ///< set when the episode threw
};

using ScenarioGenerator = std::function<Scenario(std::uint64_t seed)>;

/// Runs seeds seed_base .. seed_base + n - 1 on up to `parallelism` threads. Results are ordered by
/// seed and do not depend on the thread count. Episode failures are recorded, not rethrown.
std::vector<BatchEntry> run_batch(const ScenarioGenerator& generator, int n, int parallelism,
                                  std::uint64_t seed_base = 0);

struct HeadOnBatchOptions {
  std::vector<HumanVariant> human_models{HumanVariant::kIbr, HumanVariant::kOc};
  double max_relative_heading = 0.7853981633974483;  ///< pi / 4
  HeadOnOptions scene;
};

/// The relative heading is drawn uniformly from the seed; with several human models the seed picks one
/// in turn (seed % count).
ScenarioGenerator headon_generator(const std::string& robot_policy, const HeadOnBatchOptions& options = {});
double headon_relative_heading(std::uint64_t seed, double max_relative_heading);

}  // namespace socnav
