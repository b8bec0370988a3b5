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

// kea_tuner <command> [--config file] [--set key=value]... [--seed n] [--out dir]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kea/commands.h"

int main(int argc, char** argv) {
  CLI::App app{"Cluster configuration tuning toolkit"};
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<long long> seed;
  std::optional<std::string> out;

  app.add_option("command", command, "gen | fit | optimize-yarn | design-sku | price | flight-analyze")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", overrides, "override a config key, e.g. optimizer.delta_max=2")
      ->allow_extra_args(false);
  app.add_option("--seed", seed, "seed for stochastic commands");
  app.add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kea::commands::kExitValidation;
  }

  kea::config::Layers layers;
  if (!config_path.empty()) layers.file = config_path;
  layers.overrides = overrides;
  layers.seed = seed;
  layers.output_dir = out;
  return kea::commands::Run(command, layers, std::cout, std::cerr);
}
