// Copyright 2026 The ShopSim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON scenario files. Every section is optional and falls back to the
// built-in defaults; unknown keys are rejected. See README.md for the schema.

#ifndef SHOPSIM_CONFIG_HPP_
#define SHOPSIM_CONFIG_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "shopsim/model.hpp"

namespace shopsim {

// Unreadable, ill-formed or schema-invalid configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

// Canonical JSON of a fully resolved scenario (defaults expanded).
nlohmann::json to_json(const ScenarioConfig& cfg);

// 16 hex digits identifying the resolved scenario.
std::string config_fingerprint(const ScenarioConfig& cfg);

}  // namespace shopsim

#endif  // SHOPSIM_CONFIG_HPP_
