#pragma once

/**
 * @file metrics.hpp
 * @brief Interaction metrics and batch summaries.
 *
 *   MinDist  min_t |p_a(t) - p_b(t)|                     per agent pair
 *   PI       sum_t angle(vel_t, goal - p_t)               zero-speed / at-goal terms count 0
 *   D2G      |p_end - goal|
 *   ACC      (1 / dt) sum_t |vel_{t+1} - vel_t|           planar velocity vectors
 *
 * Summaries use linearly interpolated quartiles (Hyndman-Fan type 7).
 */

#include "socnav/simulation.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace socnav {

/// Throws std::invalid_argument when the trajectories have different lengths.
double min_dist(const Trajectory& a, const Trajectory& b);
double path_irregularity(const Trajectory& traj, const Vec2& goal);
double dist_to_goal(const Trajectory& traj, const Vec2& goal);
double total_acceleration(const Trajectory& traj);

/// First state index where |theta_t - theta_0| exceeds `threshold`, or -1.
int first_heading_deviation(const Trajectory& traj, double threshold = 0.1);

inline constexpr const char* kMinDist = "MinDist";
inline constexpr const char* kPathIrregularity = "PI";
inline constexpr const char* kDistToGoal = "D2G";
inline constexpr const char* kAcceleration = "ACC";

struct MetricRow {
  std::uint64_t seed = 0;
  std::string condition;  ///< robot policy of the episode
  std::string agent;      ///< agent id, or "a|b" for pair metrics
  std::string role;       ///< agent role, or "pair"
  std::string metric;
  double value = 0.0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  int count = 0;

  friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

/// Type-7 quartiles; throws std::invalid_argument on empty input.
Quartiles quartiles(std::vector<double> values);
/// Type-7 quantile of sorted values, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

struct SummaryRow {
  std::string condition;
  std::string role;
  std::string metric;
  Quartiles stats;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct MetricsReport {
  std::vector<MetricRow> rows;        ///< ordered by input log, then agent, then metric
  std::vector<SummaryRow> summary;    ///< ordered by condition, role, metric

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
  const SummaryRow* find(std::string_view condition, std::string_view role, std::string_view metric) const;
};

/// Condition label of an episode: the robot's policy, or the first agent's when there is no robot.
std::string episode_condition(const EpisodeLog& log);

std::vector<MetricRow> episode_metrics(const EpisodeLog& log);

/// Throws std::invalid_argument on empty input.
MetricsReport aggregate(std::span<const EpisodeLog> logs);
/// Summary recomputed from rows alone.
MetricsReport aggregate_rows(std::vector<MetricRow> rows);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& doc);
/// Columns seed,condition,agent,role,metric,value.
void write_csv(const MetricsReport& report, std::ostream& out);
/// Columns condition,role,metric,count,min,q1,median,q3,max.
void write_summary_csv(const MetricsReport& report, std::ostream& out);

}  // namespace socnav
