#include "cli.hpp"

#include "socnav/config_io.hpp"
#include "socnav/hitl_server.hpp"
#include "socnav/metrics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <numbers>
#include <ostream>
#include <thread>

#ifndef SOCNAV_VERSION
#define SOCNAV_VERSION "unknown"
#endif
#ifndef SOCNAV_GIT
#define SOCNAV_GIT "unknown"
#endif
#ifndef SOCNAV_WWW_DIR
#define SOCNAV_WWW_DIR ""
#endif
#ifndef SOCNAV_INSTALLED_WWW_DIR
#define SOCNAV_INSTALLED_WWW_DIR ""
#endif

namespace socnav::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kRobotPolicies{"ours", "vibr", "oc", "sfm", "reactive_cv"};

json human_tree(const HumanModel& m) {
  return {{"planner", to_json(m.planner)},
          {"model", to_json(m.robot_model)},
          {"noise", {{"sigma_omega", m.noise.sigma_omega}, {"sigma_a", m.noise.sigma_a}}}};
}

HumanModel human_from_tree(HumanVariant variant, const json& tree) {
  HumanModel m = HumanModel::defaults(variant);
  m.planner = planner_config_from_json(tree.at("planner"), m.planner);
  m.robot_model = planner_config_from_json(tree.at("model"), m.robot_model);
  m.noise.sigma_omega = tree.at("noise").at("sigma_omega").get<double>();
  m.noise.sigma_a = tree.at("noise").at("sigma_a").get<double>();
  return m;
}

json scene_tree(const HeadOnOptions& o) {
  return {{"separation", o.separation}, {"goal_distance", o.goal_distance}, {"start_speed", o.start_speed},
          {"tie_break", o.tie_break},   {"duration", o.duration},           {"dt", o.dt},
          {"max_relative_heading", std::numbers::pi / 4}, {"heading", nullptr}};
}

HeadOnOptions scene_from_tree(const json& t) {
  HeadOnOptions o;
  o.separation = t.at("separation").get<double>();
  o.goal_distance = t.at("goal_distance").get<double>();
  o.start_speed = t.at("start_speed").get<double>();
  o.tie_break = t.at("tie_break").get<double>();
  o.duration = t.at("duration").get<double>();
  o.dt = t.at("dt").get<double>();
  return o;
}

/// Applies the override to every tree that has the key; returns how many did.
int apply_where_present(std::vector<json*> trees, const std::string& key, const std::string& value) {
  int applied = 0;
  for (json* t : trees) {
    json trial = *t;
    try {
      apply_override(trial, key, value);
    } catch (const ConfigError&) {
      continue;
    }
    *t = std::move(trial);
    ++applied;
  }
  return applied;
}

void check_policy(const std::string& name) {
  if (std::find(kRobotPolicies.begin(), kRobotPolicies.end(), name) == kRobotPolicies.end()) {
    throw UsageError("unknown policy '" + name + "' (expected ours, vibr, oc, sfm or reactive_cv)");
  }
}

void write_json(const fs::path& path, const json& doc, int indent = 2) {
  std::ofstream out(path);
  out << doc.dump(indent) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

template <class F>
void write_file(const fs::path& path, F&& body) {
  std::ofstream out(path);
  body(out);
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_report(const fs::path& dir, const MetricsReport& report) {
  write_json(dir / "report.json", to_json(report));
  write_file(dir / "report.csv", [&](std::ostream& o) { write_csv(report, o); });
  write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(report, o); });
}

const std::string& robot_policy(const EpisodeLog& log) {
  static const std::string none;
  const AgentLog* r = log.find_role("robot");
  return r ? r->policy : none;
}

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  return quartiles(std::move(v)).median;
}

json optional_json(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

volatile std::sig_atomic_t g_interrupted = 0;

}  // namespace

void sort_for_report(std::vector<EpisodeLog>& logs) {
  std::stable_sort(logs.begin(), logs.end(), [](const EpisodeLog& a, const EpisodeLog& b) {
    const std::string ca = episode_condition(a), cb = episode_condition(b);
    return ca != cb ? ca < cb : a.seed < b.seed;
  });
}

ResolvedExperiment resolve(const ExperimentSpec& spec) {
  if (spec.episodes < 1) throw UsageError("--episodes must be at least 1");
  if (spec.jobs < 1) throw UsageError("--jobs must be at least 1");
  ResolvedExperiment r;
  r.spec = spec;
  r.robot_configs = json::object();

  std::vector<std::pair<std::string, std::string>> robot_ovr, human_ovr, scene_ovr;
  for (const std::string& text : spec.overrides) {
    auto [key, value] = [&] {
      try {
        return split_override(text);
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
    }();
    if (key.starts_with("scenario.")) {
      scene_ovr.emplace_back(key.substr(9), value);
    } else if (key.starts_with("human.")) {
      human_ovr.emplace_back(key.substr(6), value);
    } else {
      robot_ovr.emplace_back(key, value);
    }
  }

  const bool headon = spec.scenario == "headon";
  std::optional<Scenario> base;
  if (headon) {
    if (spec.humans.empty()) throw UsageError("--humans needs at least one model");
    r.policies = spec.policies.empty() ? std::vector<std::string>{"ours"} : spec.policies;
  } else {
    try {
      base = load_scenario(spec.scenario);
    } catch (const std::exception& e) {
      throw UsageError(std::string("cannot load scenario: ") + e.what());
    }
    const AgentSpec* robot = nullptr;
    for (const AgentSpec& a : base->agents) {
      if (a.role == "robot") robot = &a;
    }
    if (!robot) throw UsageError("scenario " + spec.scenario + " has no agent with role robot");
    r.policies = spec.policies.empty() ? std::vector<std::string>{robot->policy} : spec.policies;
  }
  for (const std::string& p : r.policies) check_policy(p);
  for (std::size_t i = 0; i < r.policies.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (r.policies[i] == r.policies[j]) throw UsageError("policy '" + r.policies[i] + "' listed twice");
    }
  }

  // Robot configuration per policy.
  for (const std::string& p : r.policies) {
    json tree = default_policy_config(p);
    if (base) {
      for (const AgentSpec& a : base->agents) {
        if (a.role == "robot" && a.policy == p) tree.merge_patch(a.config);
      }
    }
    r.robot_configs[p] = std::move(tree);
  }
  for (const auto& [key, value] : robot_ovr) {
    std::vector<json*> trees;
    for (auto& [name, tree] : r.robot_configs.items()) trees.push_back(&tree);
    if (apply_where_present(trees, key, value) == 0) {
      throw UsageError("override '" + key + "' matches no configuration key of the selected policies");
    }
  }

  if (headon) {
    r.human_configs = json::object();
    for (HumanVariant v : spec.humans) r.human_configs[to_string(v)] = human_tree(HumanModel::defaults(v));
    r.scene = scene_tree(HeadOnOptions{});
  } else {
    r.human_configs = json::object();
    for (const AgentSpec& a : base->agents) {
      if (a.role == "human") {
        json tree = default_policy_config(a.policy);
        tree.merge_patch(a.config);
        r.human_configs[a.id] = std::move(tree);
      }
    }
    r.scene = to_json(*base);
  }
  for (const auto& [key, value] : human_ovr) {
    std::vector<json*> trees;
    for (auto& [name, tree] : r.human_configs.items()) trees.push_back(&tree);
    if (apply_where_present(trees, key, value) == 0) {
      throw UsageError("override 'human." + key + "' matches no human model key");
    }
  }
  for (const auto& [key, value] : scene_ovr) {
    if (apply_where_present({&r.scene}, key, value) == 0) {
      throw UsageError("override 'scenario." + key + "' matches no scene key");
    }
  }

  try {
    for (const std::string& p : r.policies) make_policy(p, r.robot_configs[p], Limits{});
    if (headon) {
      std::vector<HumanModel> humans;
      for (HumanVariant v : spec.humans) {
        humans.push_back(human_from_tree(v, r.human_configs[to_string(v)]));
        make_policy(humans.back().policy_name(), humans.back().policy_config(), Limits{});
      }
      const HeadOnOptions scene = scene_from_tree(r.scene);
      const double max_heading = r.scene.at("max_relative_heading").get<double>();
      const std::optional<double> fixed =
          r.scene.at("heading").is_null() ? std::nullopt : std::optional(r.scene.at("heading").get<double>());
      if (!(max_heading >= 0.0)) throw UsageError("scenario.max_relative_heading must be non-negative");
      for (const std::string& p : r.policies) {
        const json config = r.robot_configs[p];
        r.generators.push_back([=](std::uint64_t seed) {
          const HumanModel& h = humans[seed % humans.size()];
          const double heading = fixed ? *fixed : headon_relative_heading(seed, max_heading);
          Scenario s = generate_headon(seed, heading, h, p, scene);
          s.agents[0].config = config;
          return s;
        });
      }
      // Surface scene errors (e.g. a duration that is not a multiple of dt) before any episode runs.
      r.generators.front()(spec.seed_base).validate();
    } else {
      Scenario scene = scenario_from_json(r.scene);
      for (AgentSpec& a : scene.agents) {
        if (a.role == "human") a.config = r.human_configs[a.id];
      }
      for (const std::string& p : r.policies) {
        Scenario s = scene;
        for (AgentSpec& a : s.agents) {
          if (a.role == "robot") {
            a.policy = p;
            a.config = r.robot_configs[p];
          }
        }
        s.validate();
        r.generators.push_back([s](std::uint64_t seed) {
          Scenario copy = s;
          copy.seed = seed;
          return copy;
        });
      }
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(std::string("invalid configuration: ") + e.what());
  }
  return r;
}

RunOutcome run_experiment(const ExperimentSpec& spec, std::ostream& err) {
  const ResolvedExperiment r = resolve(spec);
  RunOutcome outcome;
  json failures = json::array();
  json flagged = json::array();
  json timing = json::object();
  fs::create_directories(spec.out / "logs");

  for (std::size_t k = 0; k < r.policies.size(); ++k) {
    const std::string& policy = r.policies[k];
    const fs::path dir = spec.out / "logs" / policy;
    fs::create_directories(dir);
    const std::vector<BatchEntry> entries = run_batch(r.generators[k], spec.episodes, spec.jobs, spec.seed_base);
    std::vector<double> robot_times;
    for (const BatchEntry& e : entries) {
      ++outcome.episodes;
      if (!e.log) {
        ++outcome.failures;
        failures.push_back({{"policy", policy}, {"seed", e.seed}, {"error", e.error}});
        err << "episode " << policy << " seed " << e.seed << " failed: " << e.error << '\n';
        continue;
      }
      write_json(dir / ("seed_" + std::to_string(e.seed) + ".json"), to_json(*e.log), 1);
      if (e.log->flagged) flagged.push_back({{"policy", policy}, {"seed", e.seed}});
      for (std::size_t i = 0; i < e.timing.agent_ids.size(); ++i) {
        if (e.log->find(e.timing.agent_ids[i])->role != "robot") continue;
        robot_times.insert(robot_times.end(), e.timing.solve_times[i].begin(), e.timing.solve_times[i].end());
      }
      outcome.logs.push_back(*e.log);
    }
    if (!robot_times.empty()) {
      double sum = 0.0;
      for (double t : robot_times) sum += t;
      timing[policy] = {{"mean_solve_time", sum / robot_times.size()},
                        {"max_solve_time", *std::max_element(robot_times.begin(), robot_times.end())},
                        {"ticks", robot_times.size()}};
    }
  }

  sort_for_report(outcome.logs);
  if (!outcome.logs.empty()) write_report(spec.out, aggregate(outcome.logs));

  json seeds = json::array();
  for (int i = 0; i < spec.episodes; ++i) seeds.push_back(spec.seed_base + i);
  json humans = json::array();
  if (spec.scenario == "headon") {
    for (HumanVariant v : spec.humans) humans.push_back(to_string(v));
  }
  outcome.manifest = {{"tool", "socnav"},
                      {"version", SOCNAV_VERSION},
                      {"git", SOCNAV_GIT},
                      {"log_schema", kLogSchemaVersion},
                      {"scenario", spec.scenario},
                      {"policies", r.policies},
                      {"human_models", humans},
                      {"episodes", spec.episodes},
                      {"seed_base", spec.seed_base},
                      {"seeds", seeds},
                      {"overrides", spec.overrides},
                      {"robot_configs", r.robot_configs},
                      {"human_configs", r.human_configs},
                      {"scene", r.scene},
                      {"failures", failures},
                      {"flagged", flagged}};
  write_json(spec.out / "manifest.json", outcome.manifest);
  // Wall-clock numbers vary run to run, so they stay out of the manifest.
  write_json(spec.out / "timing.json", timing);
  return outcome;
}

int exit_code(const RunOutcome& o) {
  if (o.failures == 0) return kOk;
  return o.failures == o.episodes ? kRuntime : kPartial;
}

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const RunOutcome o = run_experiment(spec, err);
    out << o.episodes << " episodes, " << o.failures << " failed; results in " << spec.out.string() << '\n';
    return exit_code(o);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

int cmd_sweep(const ExperimentSpec& spec, const std::string& param, const std::vector<std::string>& values,
              std::ostream& out, std::ostream& err) {
  try {
    if (param.empty() || param.find('=') != std::string::npos) throw UsageError("--param must be a key");
    if (values.empty()) throw UsageError("--values needs at least one value");
    std::vector<ExperimentSpec> subs;
    for (const std::string& v : values) {
      ExperimentSpec sub = spec;
      sub.out = spec.out / (param + "=" + v);
      sub.overrides.push_back(param + "=" + v);
      resolve(sub);  // every value is checked before anything runs
      subs.push_back(std::move(sub));
    }

    json rows = json::array();
    int code = kOk;
    fs::create_directories(spec.out);
    std::ofstream csv(spec.out / "sweep.csv");
    csv << "value,policy,episodes,failures,first_deviation_index,first_deviation_time,never_deviated,"
           "max_inconvenience,median_min_dist\n";
    for (std::size_t i = 0; i < subs.size(); ++i) {
      const RunOutcome o = run_experiment(subs[i], err);
      code = std::max(code, exit_code(o));
      const json policies = o.manifest.at("policies");
      for (const auto& pj : policies) {
        const std::string policy = pj.get<std::string>();
        std::vector<double> dev_index, dev_time, min_dist;
        int episodes = 0, never = 0;
        double max_incon = 0.0;
        for (const EpisodeLog& log : o.logs) {
          if (robot_policy(log) != policy) continue;
          ++episodes;
          const AgentLog& robot = *log.find_role("robot");
          const int idx = first_heading_deviation(robot.trajectory);
          if (idx < 0) {
            ++never;
          } else {
            dev_index.push_back(idx);
            dev_time.push_back(idx * robot.trajectory.dt);
          }
          for (const StepRecord& s : robot.steps) max_incon = std::max(max_incon, s.inconvenience);
          for (const MetricRow& m : episode_metrics(log)) {
            if (m.metric == kMinDist) min_dist.push_back(m.value);
          }
        }
        int failed = 0;
        for (const auto& f : o.manifest.at("failures")) failed += f.at("policy") == policy ? 1 : 0;
        const auto mi = median(dev_index), mt = median(dev_time), md = median(min_dist);
        rows.push_back({{"value", values[i]},
                        {"policy", policy},
                        {"episodes", episodes},
                        {"failures", failed},
                        {"first_deviation_index", optional_json(mi)},
                        {"first_deviation_time", optional_json(mt)},
                        {"never_deviated", never},
                        {"max_inconvenience", max_incon},
                        {"median_min_dist", optional_json(md)}});
        auto cell = [](std::optional<double> v) { return v ? nlohmann::json(*v).dump() : std::string(); };
        csv << values[i] << ',' << policy << ',' << episodes << ',' << failed << ',' << cell(mi) << ',' << cell(mt)
            << ',' << never << ',' << json(max_incon).dump() << ',' << cell(md) << '\n';
      }
      out << param << '=' << values[i] << ": " << o.episodes << " episodes, " << o.failures << " failed\n";
    }
    write_json(spec.out / "sweep.json", {{"param", param}, {"values", values}, {"rows", rows}});
    if (!csv) throw std::runtime_error("cannot write sweep.csv");
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

int cmd_report(const fs::path& logs, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    if (!fs::is_directory(logs)) throw UsageError("not a directory: " + logs.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(logs)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<EpisodeLog> parsed;
    json skipped = json::array();
    for (const fs::path& f : files) {
      try {
        std::ifstream in(f);
        const json doc = json::parse(in);
        parsed.push_back(episode_log_from_json(doc));
      } catch (const std::exception& e) {
        err << "warning: skipping " << f.string() << ": " << e.what() << '\n';
        skipped.push_back({{"path", f.string()}, {"error", e.what()}});
      }
    }
    if (parsed.empty()) {
      err << "error: no readable logs under " << logs.string() << '\n';
      return kRuntime;
    }
    sort_for_report(parsed);
    fs::create_directories(out_dir);
    write_report(out_dir, aggregate(parsed));
    write_json(out_dir / "report_manifest.json",
               {{"tool", "socnav"}, {"version", SOCNAV_VERSION}, {"logs", parsed.size()}, {"skipped", skipped}});
    out << parsed.size() << " logs, " << skipped.size() << " skipped; report in " << out_dir.string() << '\n';
    return skipped.empty() ? kOk : kPartial;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

int cmd_hitl(const HitlSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    Scenario scenario;
    try {
      scenario = spec.scenario == "headon"
                     ? generate_headon(0, 0.0, HumanModel::defaults(HumanVariant::kIbr), "ours")
                     : load_scenario(spec.scenario);
    } catch (const std::exception& e) {
      throw UsageError(std::string("cannot load scenario: ") + e.what());
    }
    hitl::ServerOptions o;
    const std::size_t colon = spec.bind.rfind(':');
    if (colon == std::string::npos) throw UsageError("--bind must look like address:port");
    o.address = spec.bind.substr(0, colon);
    try {
      const int port = std::stoi(spec.bind.substr(colon + 1));
      if (port < 0 || port > 65535) throw std::out_of_range("port");
      o.port = static_cast<std::uint16_t>(port);
    } catch (const std::logic_error&) {
      throw UsageError("bad port in --bind '" + spec.bind + "'");
    }
    o.static_dir = spec.static_dir;
    if (o.static_dir.empty()) {
      for (const char* candidate : {SOCNAV_INSTALLED_WWW_DIR, SOCNAV_WWW_DIR}) {
        if (*candidate && fs::is_directory(candidate)) {
          o.static_dir = candidate;
          break;
        }
      }
    }
    o.record_path = spec.record;
    o.session.human_id = spec.human;
    o.session.tick_budget = spec.tick_budget;

    std::unique_ptr<hitl::Server> server;
    try {
      server = std::make_unique<hitl::Server>(std::move(scenario), o);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    server->start();
    out << "serving http://" << o.address << ':' << server->port() << "/";
    if (o.static_dir.empty()) out << " (no static client)";
    out << std::endl;

    g_interrupted = 0;
    auto previous = std::signal(SIGINT, [](int) { g_interrupted = 1; });
    while (!server->wait_for(0.25) && !g_interrupted) {
    }
    std::signal(SIGINT, previous);
    server->stop();
    const hitl::ServerStats st = server->stats();
    out << "ticks " << st.ticks << ", overruns " << st.overruns << ", malformed " << st.malformed << ", refused "
        << st.refused << (st.finished ? ", finished" : ", stopped") << '\n';
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Socially aware navigation: batch experiments, reports and the human-in-the-loop server"};
  app.set_version_flag("--version", std::string(SOCNAV_VERSION) + " (" + SOCNAV_GIT + ")");
  app.require_subcommand(1);

  ExperimentSpec spec;
  spec.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::string> humans{"ibr", "oc"};
  auto experiment_flags = [&](CLI::App* sub) {
    sub->add_option("--scenario", spec.scenario, "\"headon\" or a scenario JSON file")->capture_default_str();
    sub->add_option("--policies", spec.policies, "Robot policies: ours, vibr, oc, sfm, reactive_cv")
        ->delimiter(',');
    sub->add_option("--humans", humans, "Simulated human models for head-on, used by seed in turn: ibr, oc")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--episodes,-n", spec.episodes, "Episodes per policy")->capture_default_str();
    sub->add_option("--seed-base", spec.seed_base, "First seed")->capture_default_str();
    sub->add_option("--out,-o", spec.out, "Output directory")->capture_default_str();
    sub->add_option("--override", spec.overrides,
                    "key=value; plain keys set the robot config (planner.markup), 'human.' keys the human "
                    "models, 'scenario.' keys the scene. Repeatable.");
    sub->add_option("--jobs,-j", spec.jobs, "Worker threads")->capture_default_str();
  };

  CLI::App* run = app.add_subcommand("run", "Run a batch of episodes and write logs, report and manifest");
  experiment_flags(run);

  CLI::App* sweep = app.add_subcommand("sweep", "Repeat a run for each value of one parameter");
  experiment_flags(sweep);
  std::string param;
  std::vector<std::string> values;
  sweep->add_option("--param", param, "Override key to vary, e.g. planner.markup")->required();
  sweep->add_option("--values", values, "Values, comma separated")->delimiter(',')->required();

  CLI::App* report = app.add_subcommand("report", "Rebuild the metrics report from a directory of logs");
  fs::path logs_dir, report_out;
  report->add_option("logs", logs_dir, "Directory of episode logs")->required();
  report->add_option("--out,-o", report_out, "Output directory (defaults to the log directory)");

  CLI::App* hitl = app.add_subcommand("hitl", "Serve a scenario to a human driver over a websocket");
  HitlSpec hs;
  hitl->add_option("--scenario", hs.scenario, "\"headon\" or a scenario JSON file")->capture_default_str();
  hitl->add_option("--bind", hs.bind, "address:port (port 0 picks one)")->capture_default_str();
  hitl->add_option("--human", hs.human, "Id of the human-driven agent")->capture_default_str();
  hitl->add_option("--static", hs.static_dir, "Directory with the browser client");
  hitl->add_option("--record", hs.record, "Write the session recording here");
  hitl->add_option("--tick-budget", hs.tick_budget, "Planner wall-time budget per tick [s]")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  auto parse_humans = [&]() -> bool {
    spec.humans.clear();
    try {
      for (const std::string& h : humans) spec.humans.push_back(human_variant_from_string(h));
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return false;
    }
    return true;
  };

  if (run->parsed()) return parse_humans() ? cmd_run(spec, out, err) : kUsage;
  if (sweep->parsed()) return parse_humans() ? cmd_sweep(spec, param, values, out, err) : kUsage;
  if (report->parsed()) return cmd_report(logs_dir, report_out.empty() ? logs_dir : report_out, out, err);
  return cmd_hitl(hs, out, err);
}

}  // namespace socnav::cli
