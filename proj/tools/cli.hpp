#pragma once

#include "socnav/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace socnav::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2, kPartial = 3 };

/// Bad flags, unknown policies or override keys.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
  std::string scenario = "headon";  ///< "headon" or a scenario file
  /// Robot policies. Empty means "ours" for head-on and the file's robot policy otherwise.
  std::vector<std::string> policies;
  std::vector<HumanVariant> humans{HumanVariant::kIbr, HumanVariant::kOc};
  int episodes = 20;
  std::uint64_t seed_base = 0;
  std::filesystem::path out = "results";
  /// "key=value". Plain keys go to the robot configuration ("planner.markup"), "human." keys to the
  /// simulated human models, "scenario." keys to the scene.
  std::vector<std::string> overrides;
  int jobs = 1;
};

/// Everything an experiment resolves to before it runs; this is what the manifest records.
struct ResolvedExperiment {
  ExperimentSpec spec;
  std::vector<std::string> policies;
  nlohmann::json robot_configs;  ///< policy -> config document
  nlohmann::json human_configs;  ///< variant -> {planner, model, noise}; head-on only
  nlohmann::json scene;          ///< head-on options, or the scenario document
  std::vector<ScenarioGenerator> generators;  ///< one per policy
};

/// Throws UsageError.
ResolvedExperiment resolve(const ExperimentSpec& spec);

struct RunOutcome {
  int episodes = 0;
  int failures = 0;
  std::vector<EpisodeLog> logs;  ///< in report order: condition, then seed
  nlohmann::json manifest;
};

/// Runs every policy over the seeds and writes logs/<policy>/seed_<n>.json, report.json, report.csv,
/// summary.csv and manifest.json under spec.out.
RunOutcome run_experiment(const ExperimentSpec& spec, std::ostream& err);

int exit_code(const RunOutcome& outcome);

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
/// One sub-experiment per value under out/<param>=<value>, plus sweep.json and sweep.csv.
int cmd_sweep(const ExperimentSpec& spec, const std::string& param, const std::vector<std::string>& values,
              std::ostream& out, std::ostream& err);
/// Rebuilds the report from every *.json log below `logs`; unreadable logs are skipped and listed.
int cmd_report(const std::filesystem::path& logs, const std::filesystem::path& out_dir, std::ostream& out,
               std::ostream& err);

struct HitlSpec {
  std::string scenario = "headon";
  std::string bind = "127.0.0.1:8080";
  std::string human = "human";
  std::filesystem::path static_dir;
  std::optional<std::filesystem::path> record;
  double tick_budget = 0.1;
};

int cmd_hitl(const HitlSpec& spec, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Logs sorted the way reports order them.
void sort_for_report(std::vector<EpisodeLog>& logs);

}  // namespace socnav::cli
