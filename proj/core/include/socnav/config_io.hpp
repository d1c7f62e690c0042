#pragma once

// JSON forms of the configuration types. Readers start from a base value and
// apply only the keys present, so partial documents act as overrides. Unknown
// keys are errors.

#include "socnav/baselines.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace socnav {

/// Thrown on malformed or unknown configuration keys and values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const Limits& limits);
Limits limits_from_json(const nlohmann::json& doc, Limits base = {});

nlohmann::json to_json(const PlannerConfig& cfg);
PlannerConfig planner_config_from_json(const nlohmann::json& doc, PlannerConfig base = {});

nlohmann::json to_json(const SfmParams& params);
SfmParams sfm_params_from_json(const nlohmann::json& doc, SfmParams base = {});

nlohmann::json to_json(const ReactiveParams& params);
ReactiveParams reactive_params_from_json(const nlohmann::json& doc, ReactiveParams base = {});

/// Sets `key` (dotted path, e.g. "planner.markup") in `tree` to `value`. The value text is parsed
/// as JSON when possible ("1.1", "true", "[1,2]") and kept as a string otherwise. Every path
/// segment except the last must already exist unless `create` is set.
void apply_override(nlohmann::json& tree, std::string_view key, std::string_view value, bool create = false);

/// Splits "key=value"; throws ConfigError when there is no '='.
std::pair<std::string, std::string> split_override(std::string_view assignment);

}  // namespace socnav
