#pragma once

#include <string>

#include <json.hpp>

#include "crowdnav/planner/st_planner.hpp"

namespace crowdnav::planner {

// JSON debug dump of solver inputs and outputs, for replaying failed solves.
// Doubles are written with round-trip precision, so a reloaded request
// reproduces the original solve bit-for-bit.
nlohmann::json to_json(const PlanRequest& request);
nlohmann::json to_json(const PlanResult& result);
nlohmann::json to_json(const PlannerConfig& config);
PlanRequest plan_request_from_json(const nlohmann::json& j);
PlanResult plan_result_from_json(const nlohmann::json& j);

nlohmann::json field_to_json(const cost::ObstacleField& field);
cost::ObstacleField field_from_json(const nlohmann::json& j);

void write_plan_dump(const std::string& path, const PlanRequest& request,
                     const PlannerConfig& config, const PlanResult* result);

}  // namespace crowdnav::planner
