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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "kea/common.h"
#include "kea/sku.h"
#include "oracles.h"

using namespace kea;
using namespace kea::sku;
namespace fs = std::filesystem;

namespace {

whatif::ResourceModels Fixed(double a_s, double b_s, double a_r, double b_r) {
  whatif::ResourceModels m;
  m.group_id = "g";
  m.p = {a_s, b_s, 0, 0};
  m.q = {a_r, b_r, 0, 0};
  m.beta_samples = {{b_s, b_r}};
  return m;
}

whatif::ResourceModels Spread(uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> s(25, 3), r(4, 0.5);
  auto m = Fixed(60, 25, 12, 4);
  m.beta_samples.clear();
  for (int i = 0; i < n; ++i) m.beta_samples.emplace_back(s(rng), r(rng));
  return m;
}

// Starts from a full machine and shrinks the core count until each
// resource fits.
double OracleCost(double as, double bs, double ar, double br, double S, double R,
                  const CostConfig& cfg) {
  double c = cfg.c_max;
  if (as + bs * c > S) c = (S - as) / bs;
  if (ar + br * c > R) c = (R - ar) / br;
  if (c < 0) c = 0;
  double ssd = S - as - bs * c, ram = R - ar - br * c;
  double cost = (cfg.c_max - c) * cfg.unit_core;
  cost += ssd > kStrandEpsilon ? ssd * cfg.unit_ssd_gb : cfg.strand_ssd;
  cost += ram > kStrandEpsilon ? ram * cfg.unit_ram_gb : cfg.strand_ram;
  return cost;
}

}  // namespace

TEST_CASE("exactly sized machine pays both stranding penalties") {
  CostConfig cfg;
  auto m = Fixed(0, 25, 0, 4);
  CHECK(DrawCost(m, 25, 4, 3200, 512, cfg) == doctest::Approx(cfg.strand_ssd + cfg.strand_ram));
  CHECK(DrawCost(m, 25, 4, 3201, 513, cfg) ==
        doctest::Approx(cfg.unit_ssd_gb + cfg.unit_ram_gb).epsilon(1e-9));
}

TEST_CASE("starved machine idles every core") {
  CostConfig cfg;
  auto m = Fixed(60, 25, 12, 4);
  double cost = DrawCost(m, 25, 4, 50, 1000, cfg);
  CHECK(cost == doctest::Approx(cfg.unit_core * cfg.c_max + cfg.strand_ssd +
                                cfg.unit_ram_gb * (1000 - 12)));
}

TEST_CASE("draw cost matches a direct evaluation") {
  CostConfig cfg;
  cfg.c_max = 96;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    double as = 100 * u(rng), bs = 5 + 40 * u(rng), ar = 20 * u(rng), br = 1 + 8 * u(rng);
    double S = 5000 * u(rng) + 1, R = 1000 * u(rng) + 1;
    auto m = Fixed(as, bs, ar, br);
    double got = DrawCost(m, bs, br, S, R, cfg);
    CHECK(got == doctest::Approx(OracleCost(as, bs, ar, br, S, R, cfg)).epsilon(1e-9));
    CHECK(got >= 0);
    // Idle cores stay within [0, c_max] so the core term is bounded.
    CHECK(got <= cfg.unit_core * cfg.c_max + cfg.unit_ssd_gb * S + cfg.unit_ram_gb * R +
                     cfg.strand_ssd + cfg.strand_ram + 1e-9);
  }
}

TEST_CASE("more SSD never costs more while SSD is the binding resource") {
  CostConfig cfg;
  auto m = Fixed(60, 25, 12, 4);
  const double R = 300;  // supports (300 - 12) / 4 = 72 cores
  const double need = 60 + 25 * 72.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double S = 61; S < need; S += 7) {
    double cost = DrawCost(m, 25, 4, S, R, cfg);
    CHECK(cost <= prev);
    prev = cost;
  }
  // One gigabyte past the need avoids the stranding penalty.
  CHECK(DrawCost(m, 25, 4, need + 1, R, cfg) < DrawCost(m, 25, 4, need, R, cfg));
}

TEST_CASE("single slope sample gives the deterministic cost") {
  CostConfig cfg;
  auto m = Fixed(60, 25, 12, 4);
  auto e = SimulateDesignCostStats(m, 2000, 400, cfg, 50, 9);
  CHECK(e.mean == doctest::Approx(DrawCost(m, 25, 4, 2000, 400, cfg)));
  CHECK(e.standard_error == 0);
  CHECK(e.draws == 50);
}

TEST_CASE("independent sampling uses each positive slope") {
  CostConfig cfg;
  auto m = Fixed(60, 25, 12, 4);
  m.beta_samples = {{25, 4}, {25, -1}, {-3, 4}};
  double joint = SimulateDesignCost(m, 2000, 400, cfg, 20, 1, BetaSampling::kJoint);
  double indep = SimulateDesignCost(m, 2000, 400, cfg, 20, 1, BetaSampling::kIndependent);
  CHECK(joint == doctest::Approx(DrawCost(m, 25, 4, 2000, 400, cfg)));
  CHECK(indep == doctest::Approx(joint));
}

TEST_CASE("simulation errors") {
  CostConfig cfg;
  auto m = Fixed(60, 25, 12, 4);
  CHECK_THROWS_AS(SimulateDesignCost(m, 2000, 400, cfg, 0, 1), ValidationError);
  CHECK_THROWS_AS(SimulateDesignCost(m, 0, 400, cfg, 10, 1), ValidationError);
  auto bad = m;
  bad.beta_samples = {{-1, 4}, {25, 0}};
  CHECK_THROWS_AS(SimulateDesignCost(bad, 2000, 400, cfg, 10, 1), RuntimeError);
  bad.beta_samples.clear();
  CHECK_THROWS_AS(SimulateDesignCost(bad, 2000, 400, cfg, 10, 1), ValidationError);
  auto cheap = cfg;
  cheap.strand_ssd = cfg.unit_ssd_gb / 2;
  CHECK_THROWS_AS(cheap.Validate(), ValidationError);
  cheap = cfg;
  cheap.c_max = 0;
  CHECK_THROWS_AS(cheap.Validate(), ValidationError);
}

TEST_CASE("surface is reproducible and independent of worker count") {
  CostConfig cfg;
  auto m = Spread(2, 300);
  auto ssd = LinearGrid(1500, 4500, 6), ram = LinearGrid(200, 700, 5);
  SetWorkerCount(1);
  auto one = ComputeCostSurface(m, ssd, ram, cfg, 200, 77);
  SetWorkerCount(4);
  auto four = ComputeCostSurface(m, ssd, ram, cfg, 200, 77);
  SetWorkerCount(0);
  CHECK(one.expected_cost == four.expected_cost);
  for (std::size_t i = 0; i < ssd.size(); ++i)
    for (std::size_t j = 0; j < ram.size(); ++j)
      CHECK(one.expected_cost[i][j] == SimulateDesignCost(m, ssd[i], ram[j], cfg, 200, 77));
  auto other = ComputeCostSurface(m, ssd, ram, cfg, 200, 78);
  CHECK(other.expected_cost != one.expected_cost);
  CHECK_THROWS_AS(ComputeCostSurface(m, {2, 1}, ram, cfg, 10, 1), ValidationError);
  CHECK_THROWS_AS(ComputeCostSurface(m, {}, ram, cfg, 10, 1), ValidationError);
}

TEST_CASE("pick design takes the first cell among equal minima") {
  CostSurface s;
  s.ssd_grid = {1, 2, 3};
  s.ram_grid = {10, 20};
  s.expected_cost = {{5, 3}, {3, 4}, {3, 9}};
  auto d = PickDesign(s);
  CHECK(d.ssd_gb == 1);
  CHECK(d.ram_gb == 20);
  CHECK(d.cost == 3);
  CHECK_THROWS_AS(PickDesign(CostSurface{}), ValidationError);
}

TEST_CASE("linear grid") {
  CHECK(LinearGrid(0, 10, 3) == std::vector<double>{0, 5, 10});
  CHECK(LinearGrid(4, 4, 1) == std::vector<double>{4});
  CHECK_THROWS_AS(LinearGrid(1, 2, 0), ValidationError);
  CHECK_THROWS_AS(LinearGrid(2, 1, 3), ValidationError);
}

TEST_CASE("surface CSV and summary") {
  CostConfig cfg;
  auto m = Spread(3, 50);
  auto s = ComputeCostSurface(m, {1000, 2000}, {300, 400, 500}, cfg, 20, 1);
  fs::path dir = fs::temp_directory_path() / "kea_test_sku";
  fs::create_directories(dir);
  SaveSurfaceCsv(s, dir / "surface.csv");
  auto text = oracle::Slurp(dir / "surface.csv");
  CHECK(text.rfind("ssd_gb,ram_gb,expected_cost\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  auto md = SummaryMarkdown(m, s, PickDesign(s), cfg);
  CHECK(md.find("| grid | 2 x 3 |") != std::string::npos);
  CHECK(md.find("| draws per cell | 20 |") != std::string::npos);
}
