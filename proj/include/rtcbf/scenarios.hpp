#pragma once

#include <nlohmann/json.hpp>

#include "rtcbf/agents.hpp"
#include "rtcbf/sim.hpp"

namespace rtcbf {

// Checks types and ranges of a scenario config document; throws
// std::invalid_argument with a message on the first problem found.
void validate_config(const nlohmann::json& config);

// Builders exposed for tests; run_scenario dispatches on config["scenario"].
SingleAgentScenario build_acc(const nlohmann::json& config);
SingleAgentScenario build_corridor(const nlohmann::json& config, bool second_order);
MultiAgentWorld build_multiagent(const nlohmann::json& config, int which);

SimLog run_scenario(const nlohmann::json& config);

}  // namespace rtcbf
