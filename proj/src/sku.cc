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

#include "kea/sku.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kea/common.h"

namespace kea::sku {

void CostConfig::Validate() const {
  for (double v : {unit_core, unit_ssd_gb, unit_ram_gb, strand_ssd, strand_ram})
    if (!(v >= 0) || !std::isfinite(v)) throw ValidationError("costs must be finite and >= 0");
  if (strand_ssd < unit_ssd_gb || strand_ram < unit_ram_gb)
    throw ValidationError("stranding penalties must be >= the idle unit costs");
  if (c_max < 1) throw ValidationError("c_max must be >= 1");
}

double DrawCost(const whatif::ResourceModels& models, double beta_s, double beta_r, double S,
                double R, const CostConfig& cfg) {
  const double alpha_s = models.p.intercept;
  const double alpha_r = models.q.intercept;
  double c = std::min({static_cast<double>(cfg.c_max), (S - alpha_s) / beta_s,
                       (R - alpha_r) / beta_r});
  c = std::clamp(c, 0.0, static_cast<double>(cfg.c_max));
  double idle_cores = cfg.c_max - c;
  // A starved design (S below the zero-core baseline) has no idle SSD rather
  // than negative idle SSD.
  double idle_ssd = std::max(0.0, S - (alpha_s + beta_s * c));
  double idle_ram = std::max(0.0, R - (alpha_r + beta_r * c));
  double cost = cfg.unit_core * idle_cores + cfg.unit_ssd_gb * idle_ssd +
                cfg.unit_ram_gb * idle_ram;
  if (idle_ssd <= kStrandEpsilon) cost += cfg.strand_ssd;
  if (idle_ram <= kStrandEpsilon) cost += cfg.strand_ram;
  return cost;
}

namespace {

struct Sampler {
  std::vector<std::pair<double, double>> joint;  // both slopes positive
  std::vector<double> ssd;                        // positive ssd slopes
  std::vector<double> ram;                        // positive ram slopes
};

Sampler MakeSampler(const whatif::ResourceModels& models, BetaSampling sampling) {
  if (models.beta_samples.empty()) throw ValidationError("beta_samples is empty");
  Sampler s;
  for (const auto& [bs, br] : models.beta_samples) {
    if (!std::isfinite(bs) || !std::isfinite(br))
      throw ValidationError("beta_samples contain non-finite values");
    if (bs > 0 && br > 0) s.joint.emplace_back(bs, br);
    if (bs > 0) s.ssd.push_back(bs);
    if (br > 0) s.ram.push_back(br);
  }
  bool ok = sampling == BetaSampling::kJoint ? !s.joint.empty()
                                             : (!s.ssd.empty() && !s.ram.empty());
  if (!ok) throw RuntimeError("every beta sample is non-positive; cannot invert usage models");
  return s;
}

// Rejection of non-positive samples is equivalent to sampling uniformly from
// the positive subset, which is what the filtered pools do.
std::pair<double, double> Draw(const Sampler& s, BetaSampling sampling, Rng& rng) {
  if (sampling == BetaSampling::kJoint) {
    std::uniform_int_distribution<std::size_t> pick(0, s.joint.size() - 1);
    return s.joint[pick(rng)];
  }
  std::uniform_int_distribution<std::size_t> pick_s(0, s.ssd.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_r(0, s.ram.size() - 1);
  double bs = s.ssd[pick_s(rng)];
  double br = s.ram[pick_r(rng)];
  return {bs, br};
}

}  // namespace

CostEstimate SimulateDesignCostStats(const whatif::ResourceModels& models, double S, double R,
                                     const CostConfig& cfg, int draws, uint64_t seed,
                                     BetaSampling sampling) {
  cfg.Validate();
  if (!(S > 0) || !(R > 0) || !std::isfinite(S) || !std::isfinite(R))
    throw ValidationError("SSD and RAM sizes must be positive");
  if (draws < 1) throw ValidationError("draws must be >= 1");
  Sampler sampler = MakeSampler(models, sampling);

  // Welford accumulation.
  double mean = 0, m2 = 0;
  for (int i = 0; i < draws; ++i) {
    Rng rng = SubStream(seed, static_cast<uint64_t>(i));
    auto [bs, br] = Draw(sampler, sampling, rng);
    double cost = DrawCost(models, bs, br, S, R, cfg);
    double d = cost - mean;
    mean += d / (i + 1);
    m2 += d * (cost - mean);
  }
  CostEstimate e;
  e.mean = mean;
  e.draws = draws;
  e.standard_error = draws > 1 ? std::sqrt(m2 / (draws - 1) / draws) : 0.0;
  return e;
}

double SimulateDesignCost(const whatif::ResourceModels& models, double S, double R,
                          const CostConfig& cfg, int draws, uint64_t seed,
                          BetaSampling sampling) {
  return SimulateDesignCostStats(models, S, R, cfg, draws, seed, sampling).mean;
}

CostSurface ComputeCostSurface(const whatif::ResourceModels& models,
                               const std::vector<double>& ssd_grid,
                               const std::vector<double>& ram_grid, const CostConfig& cfg,
                               int draws, uint64_t seed, BetaSampling sampling) {
  if (ssd_grid.empty() || ram_grid.empty()) throw ValidationError("design grids must be non-empty");
  for (const auto* grid : {&ssd_grid, &ram_grid})
    for (std::size_t i = 1; i < grid->size(); ++i)
      if (!((*grid)[i] > (*grid)[i - 1])) throw ValidationError("design grids must be ascending");
  CostSurface surface;
  surface.ssd_grid = ssd_grid;
  surface.ram_grid = ram_grid;
  surface.draws = draws;
  surface.seed = seed;
  surface.expected_cost.assign(ssd_grid.size(), std::vector<double>(ram_grid.size()));
  const std::size_t cols = ram_grid.size();
  ParallelFor(ssd_grid.size() * cols, [&](std::size_t cell) {
    std::size_t i = cell / cols, j = cell % cols;
    surface.expected_cost[i][j] =
        SimulateDesignCost(models, ssd_grid[i], ram_grid[j], cfg, draws, seed, sampling);
  });
  return surface;
}

Design PickDesign(const CostSurface& surface) {
  if (surface.ssd_grid.empty() || surface.ram_grid.empty())
    throw ValidationError("cost surface is empty");
  Design best{surface.ssd_grid[0], surface.ram_grid[0], surface.expected_cost[0][0]};
  for (std::size_t i = 0; i < surface.ssd_grid.size(); ++i)
    for (std::size_t j = 0; j < surface.ram_grid.size(); ++j)
      if (surface.expected_cost[i][j] < best.cost)
        best = {surface.ssd_grid[i], surface.ram_grid[j], surface.expected_cost[i][j]};
  return best;
}

std::vector<double> LinearGrid(double lo, double hi, int points) {
  if (points < 1) throw ValidationError("grid needs at least one point");
  if (points == 1) return {lo};
  if (!(hi > lo)) throw ValidationError("grid upper bound must exceed lower bound");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

void SaveSurfaceCsv(const CostSurface& surface, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << "ssd_gb,ram_gb,expected_cost\n";
  for (std::size_t i = 0; i < surface.ssd_grid.size(); ++i)
    for (std::size_t j = 0; j < surface.ram_grid.size(); ++j)
      out << FormatDouble(surface.ssd_grid[i]) << ',' << FormatDouble(surface.ram_grid[j]) << ','
          << FormatDouble(surface.expected_cost[i][j]) << '\n';
  if (!out) throw RuntimeError("write failed: " + path.string());
}

std::string SummaryMarkdown(const whatif::ResourceModels& models, const CostSurface& surface,
                            const Design& best, const CostConfig& cfg) {
  std::ostringstream md;
  md << "# SKU design for " << models.group_id << "\n\n"
     << "| quantity | value |\n|---|---|\n"
     << "| cores per machine | " << cfg.c_max << " |\n"
     << "| SSD model | " << FormatFixed(models.p.intercept, 3) << " + "
     << FormatFixed(models.p.slope, 4) << " * cores |\n"
     << "| RAM model | " << FormatFixed(models.q.intercept, 3) << " + "
     << FormatFixed(models.q.slope, 4) << " * cores |\n"
     << "| slope samples | " << models.beta_samples.size() << " |\n"
     << "| grid | " << surface.ssd_grid.size() << " x " << surface.ram_grid.size() << " |\n"
     << "| draws per cell | " << surface.draws << " |\n"
     << "| best SSD (GB) S* | " << FormatFixed(best.ssd_gb, 2) << " |\n"
     << "| best RAM (GB) R* | " << FormatFixed(best.ram_gb, 2) << " |\n"
     << "| expected cost | " << FormatFixed(best.cost, 4) << " |\n";
  return md.str();
}

}  // namespace kea::sku
