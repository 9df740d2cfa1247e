#pragma once

// Scenario files: TOML (default) or JSON, mapped onto ScenarioConfig with
// strict key checking.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dzvoc/cli/scenario.hpp"

namespace dzvoc::cli {

/// Unknown keys, wrong types or failed validation. `problems` lists every one.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

enum class ConfigFormat { toml, json };

nlohmann::json config_to_json(const ScenarioConfig& config);
/// Missing keys keep their defaults. Does not run validate().
ScenarioConfig config_from_json(const nlohmann::json& doc);

std::string serialize_config(const ScenarioConfig& config, ConfigFormat format = ConfigFormat::toml);
/// Throws ParseError (with line) for malformed text, ConfigError otherwise.
ScenarioConfig parse_config(std::string_view text, ConfigFormat format = ConfigFormat::toml);

/// Format from the extension (.json, else TOML). Runs validate() and throws
/// ConfigError listing every violation.
ScenarioConfig load_config(const std::filesystem::path& path);
void save_config(const ScenarioConfig& config, const std::filesystem::path& path);

/// Built-in name or path to a scenario file.
ScenarioConfig resolve_scenario(const std::string& name_or_path);

}  // namespace dzvoc::cli
