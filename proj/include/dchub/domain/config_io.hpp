#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dchub/domain/types.hpp"

namespace dchub {

inline constexpr int kSchemaVersion = 1;

// Hub configuration document (see docs/hub_config.md). Parsing errors are
// raised as InputError carrying the JSON path of the offending field.
HubSpec hub_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const HubSpec& spec);

TimeGrid time_grid_from_json(const nlohmann::json& doc, const std::string& path = "time_grid");
nlohmann::json to_json(const TimeGrid& grid);

/// Scenario documents key workload by cluster id; the hub fixes cluster order.
ScenarioSet scenario_set_from_json(const nlohmann::json& doc, const DataCenterSpec& dc);
nlohmann::json to_json(const ScenarioSet& set, const DataCenterSpec& dc);

DeratingProfile derating_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DeratingProfile& profile);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `doc` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

HubSpec load_hub_spec(const std::filesystem::path& path);
ScenarioSet load_scenario_set(const std::filesystem::path& path, const DataCenterSpec& dc);
/// Accepts a JSON document or a `timestamp,cap_kw` CSV.
DeratingProfile load_derating_profile(const std::filesystem::path& path);

}  // namespace dchub
