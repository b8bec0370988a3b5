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

// Future-SKU sizing. For a fixed core count, a candidate (SSD, RAM) design is
// priced by Monte-Carlo: draw per-core SSD/RAM slopes from observed machines,
// find how many cores the design can actually feed, and charge for idle
// resources plus a stranding penalty when SSD or RAM runs out first.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kea/whatif.h"

namespace kea::sku {

struct CostConfig {
  double unit_core = 1.0;
  double unit_ssd_gb = 0.01;
  double unit_ram_gb = 0.05;
  double strand_ssd = 500.0;
  double strand_ram = 500.0;
  int c_max = 128;

  void Validate() const;
};

enum class BetaSampling { kJoint, kIndependent };

/// No idle SSD/RAM below this many GB counts as stranded.
inline constexpr double kStrandEpsilon = 1e-9;

struct CostEstimate {
  double mean = 0;
  double standard_error = 0;  // sample sd / sqrt(draws)
  int draws = 0;
};

/// Cost of one draw for fixed slopes; exposed for direct evaluation.
double DrawCost(const whatif::ResourceModels& models, double beta_s, double beta_r, double S,
                double R, const CostConfig& cfg);

CostEstimate SimulateDesignCostStats(const whatif::ResourceModels& models, double S, double R,
                                     const CostConfig& cfg, int draws, uint64_t seed,
                                     BetaSampling sampling = BetaSampling::kJoint);

double SimulateDesignCost(const whatif::ResourceModels& models, double S, double R,
                          const CostConfig& cfg, int draws, uint64_t seed,
                          BetaSampling sampling = BetaSampling::kJoint);

struct CostSurface {
  std::vector<double> ssd_grid;
  std::vector<double> ram_grid;
  std::vector<std::vector<double>> expected_cost;  // [ssd][ram]
  int draws = 0;
  uint64_t seed = 0;
};

/// Every cell uses the same seed (common random numbers across designs).
CostSurface ComputeCostSurface(const whatif::ResourceModels& models,
                               const std::vector<double>& ssd_grid,
                               const std::vector<double>& ram_grid, const CostConfig& cfg,
                               int draws, uint64_t seed,
                               BetaSampling sampling = BetaSampling::kJoint);

struct Design {
  double ssd_gb = 0;
  double ram_gb = 0;
  double cost = 0;
};

/// Argmin; ties prefer smaller SSD, then smaller RAM.
Design PickDesign(const CostSurface& surface);

/// Evenly spaced ascending grid with `points` entries.
std::vector<double> LinearGrid(double lo, double hi, int points);

/// Long-form CSV: ssd_gb,ram_gb,expected_cost
void SaveSurfaceCsv(const CostSurface& surface, const std::filesystem::path& path);
std::string SummaryMarkdown(const whatif::ResourceModels& models, const CostSurface& surface,
                            const Design& best, const CostConfig& cfg);

}  // namespace kea::sku
