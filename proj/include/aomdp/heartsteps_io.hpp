#pragma once

#include "aomdp/heartsteps.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace aomdp::heartsteps {

nlohmann::json to_json(const UserParams& p);
UserParams user_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenarioConfig& cfg);
/// Reads the scenario keys; missing keys keep their defaults.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

void write_users(const std::filesystem::path& path, const std::vector<UserParams>& users);
std::vector<UserParams> read_users(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace aomdp::heartsteps
