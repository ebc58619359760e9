#pragma once

// JSON conversion for configuration objects. Readers reject unknown keys and
// fill absent keys from defaults.

#include "custseg/seq2seq.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>

namespace custseg {

/// Throws ConfigError naming the first key of `object` not in `allowed`.
void require_known_keys(const nlohmann::json& object, std::initializer_list<std::string_view> allowed,
                        std::string_view context);

nlohmann::json to_json(const ModelConfig& config);
nlohmann::json to_json(const TrainConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& object);
TrainConfig train_config_from_json(const nlohmann::json& object);

}  // namespace custseg
