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

// Command pipelines behind the kea_tuner CLI. Each command reads its inputs,
// runs one module pipeline and writes `<command>_<name>.<ext>` artifacts into
// the output directory.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kea/run_config.h"

namespace kea::commands {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

const std::vector<std::string>& CommandNames();

/// Writes `<dir>/<command>_<name>.<ext>` and returns its path.
std::filesystem::path EmitReport(const std::filesystem::path& dir, const std::string& command,
                                 const std::string& name, const std::string& ext,
                                 const std::string& content);

/// Runs one command on a resolved config; throws on failure.
std::vector<std::filesystem::path> Execute(const std::string& command,
                                           const nlohmann::json& config, std::ostream& summary);

/// Resolves config layers, runs, maps exceptions to exit codes 0/1/2.
int Run(const std::string& command, const config::Layers& layers, std::ostream& out,
        std::ostream& err);

}  // namespace kea::commands
