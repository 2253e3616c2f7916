#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wsr/train.hpp"

namespace wsr {

/// Everything a `train` run needs. Serialized as flat `key = value` text or
/// as a JSON object with the same keys; unknown keys are rejected.
struct RunConfig {
    TrainConfig train;
    std::string scene;    // PLY path or "synth"
    std::string cameras;  // camera JSON
    std::string images;   // image directory
    std::string out;      // output PLY
};

/// Accepts either format (JSON when the first non-space character is '{').
/// Throws std::invalid_argument naming the offending key or line.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies "key=value" strings; values use the config file syntax, and bare
/// words are taken as strings.
void apply_config_overrides(RunConfig& config, const std::vector<std::string>& assignments);

std::string to_toml(const RunConfig& config);
std::string to_json(const RunConfig& config);

}  // namespace wsr
