#include "socnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace socnav {

using nlohmann::json;

double min_dist(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size()) throw std::invalid_argument("min_dist: trajectories differ in length");
  if (a.states.empty()) throw std::invalid_argument("min_dist: empty trajectory");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < a.states.size(); ++t) best = std::min(best, (a.position(t) - b.position(t)).norm());
  return best;
}

double path_irregularity(const Trajectory& traj, const Vec2& goal) {
  double total = 0.0;
  for (const AgentState& s : traj.states) {
    const Vec2 v = s.velocity();
    const Vec2 d = goal - s.position();
    const double nv = v.norm();
    const double nd = d.norm();
    if (nv < 1e-6 || nd < 1e-6) continue;
    total += std::acos(std::clamp(v.dot(d) / (nv * nd), -1.0, 1.0));
  }
  return total;
}

double dist_to_goal(const Trajectory& traj, const Vec2& goal) { return (traj.states.back().position() - goal).norm(); }

double total_acceleration(const Trajectory& traj) {
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    total += (traj.states[t + 1].velocity() - traj.states[t].velocity()).norm();
  }
  return total / traj.dt;
}

int first_heading_deviation(const Trajectory& traj, double threshold) {
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    if (std::abs(traj.states[t].theta - traj.states.front().theta) > threshold) return static_cast<int>(t);
  }
  return -1;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quartiles of empty data");
  std::sort(values.begin(), values.end());
  return {values.front(),
          quantile_sorted(values, 0.25),
          quantile_sorted(values, 0.5),
          quantile_sorted(values, 0.75),
          values.back(),
          static_cast<int>(values.size())};
}

std::string episode_condition(const EpisodeLog& log) {
  if (const AgentLog* robot = log.find_role("robot")) return robot->policy;
  return log.agents.empty() ? std::string() : log.agents.front().policy;
}

std::vector<MetricRow> episode_metrics(const EpisodeLog& log) {
  std::vector<MetricRow> rows;
  const std::string condition = episode_condition(log);
  for (const AgentLog& a : log.agents) {
    rows.push_back({log.seed, condition, a.id, a.role, kPathIrregularity, path_irregularity(a.trajectory, a.goal)});
    rows.push_back({log.seed, condition, a.id, a.role, kDistToGoal, dist_to_goal(a.trajectory, a.goal)});
    rows.push_back({log.seed, condition, a.id, a.role, kAcceleration, total_acceleration(a.trajectory)});
  }
  for (std::size_t i = 0; i < log.agents.size(); ++i) {
    for (std::size_t j = i + 1; j < log.agents.size(); ++j) {
      const AgentLog& a = log.agents[i];
      const AgentLog& b = log.agents[j];
      rows.push_back({log.seed, condition, a.id + "|" + b.id, "pair", kMinDist, min_dist(a.trajectory, b.trajectory)});
    }
  }
  return rows;
}

MetricsReport aggregate_rows(std::vector<MetricRow> rows) {
  if (rows.empty()) throw std::invalid_argument("aggregate: no metric rows");
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> groups;
  for (const MetricRow& r : rows) groups[{r.condition, r.role, r.metric}].push_back(r.value);
  MetricsReport report;
  report.rows = std::move(rows);
  for (auto& [key, values] : groups) {
    report.summary.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), quartiles(std::move(values))});
  }
  return report;
}

MetricsReport aggregate(std::span<const EpisodeLog> logs) {
  if (logs.empty()) throw std::invalid_argument("aggregate: no episode logs");
  std::vector<MetricRow> rows;
  for (const EpisodeLog& log : logs) {
    std::vector<MetricRow> r = episode_metrics(log);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return aggregate_rows(std::move(rows));
}

const SummaryRow* MetricsReport::find(std::string_view condition, std::string_view role, std::string_view metric) const {
  for (const SummaryRow& s : summary) {
    if (s.condition == condition && s.role == role && s.metric == metric) return &s;
  }
  return nullptr;
}

json to_json(const MetricsReport& report) {
  json rows = json::array();
  for (const MetricRow& r : report.rows) {
    rows.push_back({{"seed", r.seed},
                    {"condition", r.condition},
                    {"agent", r.agent},
                    {"role", r.role},
                    {"metric", r.metric},
                    {"value", r.value}});
  }
  json summary = json::array();
  for (const SummaryRow& s : report.summary) {
    summary.push_back({{"condition", s.condition},
                       {"role", s.role},
                       {"metric", s.metric},
                       {"count", s.stats.count},
                       {"min", s.stats.min},
                       {"q1", s.stats.q1},
                       {"median", s.stats.median},
                       {"q3", s.stats.q3},
                       {"max", s.stats.max}});
  }
  return {{"format", "socnav-metrics"}, {"version", 1}, {"rows", std::move(rows)}, {"summary", std::move(summary)}};
}

MetricsReport report_from_json(const json& doc) {
  MetricsReport report;
  try {
    if (doc.at("format") != "socnav-metrics" || doc.at("version") != 1) {
      throw std::invalid_argument("metrics report: unsupported format");
    }
    for (const json& r : doc.at("rows")) {
      report.rows.push_back({r.at("seed").get<std::uint64_t>(), r.at("condition").get<std::string>(),
                             r.at("agent").get<std::string>(), r.at("role").get<std::string>(),
                             r.at("metric").get<std::string>(), r.at("value").get<double>()});
    }
    for (const json& s : doc.at("summary")) {
      report.summary.push_back({s.at("condition").get<std::string>(),
                                s.at("role").get<std::string>(),
                                s.at("metric").get<std::string>(),
                                {s.at("min").get<double>(), s.at("q1").get<double>(), s.at("median").get<double>(),
                                 s.at("q3").get<double>(), s.at("max").get<double>(), s.at("count").get<int>()}});
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("metrics report: ") + e.what());
  }
  return report;
}

void write_csv(const MetricsReport& report, std::ostream& out) {
  out << "seed,condition,agent,role,metric,value\n";
  char buf[64];
  for (const MetricRow& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << r.seed << ',' << r.condition << ',' << r.agent << ',' << r.role << ',' << r.metric << ',' << buf << '\n';
  }
}

void write_summary_csv(const MetricsReport& report, std::ostream& out) {
  out << "condition,role,metric,count,min,q1,median,q3,max\n";
  char buf[160];
  for (const SummaryRow& s : report.summary) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g", s.stats.count, s.stats.min, s.stats.q1,
                  s.stats.median, s.stats.q3, s.stats.max);
    out << s.condition << ',' << s.role << ',' << s.metric << ',' << buf << '\n';
  }
}

}  // namespace socnav
