// Copyright 2026 The KEA Tuner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kea::config {

/// Every recognised key with its default value.
nlohmann::json Defaults();

/// Rejects keys absent from Defaults() and values whose JSON type differs
/// from the default (numbers are interchangeable; null defaults accept any).
void CheckKnownKeys(const nlohmann::json& value, const nlohmann::json& schema,
                    const std::string& path = "");

/// "a.b.c=value"; value is parsed as JSON when possible, else taken as a string.
void ApplyOverride(nlohmann::json& config, const std::string& assignment);

struct Layers {
  std::optional<std::filesystem::path> file;
  std::vector<std::string> overrides;
  std::optional<long long> seed;
  std::optional<std::string> output_dir;
};

/// defaults <- file <- --set overrides <- --seed / --out
nlohmann::json Resolve(const Layers& layers);

}  // namespace kea::config
