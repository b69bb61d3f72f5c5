#pragma once

#include "hogs/optim.hpp"

#include "json.hpp"

namespace hogs {

nlohmann::json config_to_json(const TrainConfig& cfg);

/// Overlay the keys of `j` onto `base`. Unknown keys and ill-typed values
/// throw std::invalid_argument; the unknown-key message lists valid keys.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base);

/// Apply one `key=value` override. The value is parsed as JSON when possible
/// and as a plain string otherwise.
void apply_override(TrainConfig& cfg, const std::string& assignment);

std::vector<std::string> config_keys();

TrainConfig load_config_file(const std::string& path, TrainConfig base);

}  // namespace hogs
