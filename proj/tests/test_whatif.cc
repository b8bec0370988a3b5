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
#include <limits>
#include <numeric>
#include <random>

#include "kea/common.h"
#include "kea/telemetry.h"
#include "kea/whatif.h"
#include "oracles.h"

using namespace kea;
using namespace kea::whatif;

namespace {

struct Data {
  std::vector<double> x, y;
};

Data NoisyLine(uint64_t seed, int n, double a, double b, double sd) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 50);
  std::normal_distribution<double> e(0, sd);
  Data d;
  for (int i = 0; i < n; ++i) {
    d.x.push_back(u(rng));
    d.y.push_back(a + b * d.x.back() + e(rng));
  }
  return d;
}

telemetry::SyntheticSpec CleanSpec() {
  // Only the container count is noisy; every downstream relation is exact.
  telemetry::SyntheticSpec spec;
  spec.days = 4;
  spec.noise.containers = 0.5;
  telemetry::SyntheticGroupSpec g;
  g.group_id = "g";
  g.machine_count = 4;
  g.base_containers = 5;
  g.cpu_intercept = 2;
  g.cpu_per_container = 9;
  g.tasks_intercept = 1;
  g.tasks_per_cpu = 1.3;
  g.latency_intercept = 6;
  g.latency_per_cpu = 0.07;
  g.cores_per_container = 1.5;
  g.ssd_intercept = 40;
  g.ssd_per_core = 21;
  g.ram_intercept = 7;
  g.ram_per_core = 3.5;
  spec.groups = {g};
  return spec;
}

}  // namespace

TEST_CASE("clean data is fitted exactly") {
  auto d = NoisyLine(1, 100, -3.5, 2.25, 0.0);
  auto fit = FitHuberDetailed(d.x, d.y);
  CHECK(fit.converged);
  CHECK(fit.model.slope == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(fit.model.intercept == doctest::Approx(-3.5).epsilon(1e-10));
  CHECK(fit.model.n_samples == 100);
  CHECK(fit.model.residual_scale < 1e-9);
}

TEST_CASE("a threshold above every residual reproduces OLS") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    auto d = NoisyLine(seed, 80, 10, -0.7, 3.0);
    auto ols = oracle::Ols(d.x, d.y);
    double max_r = 0;
    for (std::size_t i = 0; i < d.x.size(); ++i)
      max_r = std::max(max_r, std::fabs(d.y[i] - ols.intercept - ols.slope * d.x[i]));
    HuberOptions opts;
    opts.delta = 2 * max_r;
    auto m = FitHuber(d.x, d.y, opts);
    CHECK(std::fabs(m.slope - ols.slope) <= 1e-6);
    CHECK(std::fabs(m.intercept - ols.intercept) <= 1e-6);
  }
}

TEST_CASE("scaling y and the threshold scales the coefficients") {
  auto d = NoisyLine(5, 200, 4, 1.5, 2.0);
  for (std::size_t i = 0; i < d.y.size(); i += 17) d.y[i] += 40;
  HuberOptions opts;
  opts.delta = 1.7;
  auto base = FitHuber(d.x, d.y, opts);
  for (double k : {0.01, 3.0, 250.0}) {
    auto ys = d.y;
    for (double& v : ys) v *= k;
    HuberOptions scaled = opts;
    scaled.delta = *opts.delta * k;
    auto m = FitHuber(d.x, ys, scaled);
    CHECK(std::fabs(m.slope - k * base.slope) <= 1e-9 * std::max(1.0, k * std::fabs(base.slope)));
    CHECK(std::fabs(m.intercept - k * base.intercept) <=
          1e-9 * std::max(1.0, k * std::fabs(base.intercept)));
  }
}

TEST_CASE("adaptive threshold resists gross outliers") {
  auto d = NoisyLine(9, 400, 1, 2, 0.5);
  for (std::size_t i = 0; i < d.x.size(); i += 20) d.y[i] -= 300;
  auto m = FitHuber(d.x, d.y);
  auto ols = oracle::Ols(d.x, d.y);
  CHECK(std::fabs(m.slope - 2) < 0.05);
  CHECK(std::fabs(m.intercept - 1) < 1.0);
  CHECK(std::fabs(ols.intercept - 1) > 5.0);
}

TEST_CASE("predict is exact affine evaluation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 1000; ++i) {
    LinearModel m{u(rng), u(rng) / 10, 0, 0};
    double a = u(rng), b = u(rng);
    CHECK(std::fabs((Predict(m, a) - Predict(m, b)) - m.slope * (a - b)) <=
          1e-12 * (1 + std::fabs(m.intercept) + std::fabs(m.slope) * 200));
  }
  CHECK_THROWS_AS(Predict({}, std::numeric_limits<double>::quiet_NaN()), ValidationError);
  CHECK_THROWS_AS(Predict({}, std::numeric_limits<double>::infinity()), ValidationError);
}

TEST_CASE("fit input validation") {
  std::vector<double> x{1, 2, 3}, y{1, 2};
  CHECK_THROWS_AS(FitHuber(x, y), ValidationError);
  CHECK_THROWS_AS(FitHuber(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
  CHECK_THROWS_AS(FitHuber(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}),
                  ValidationError);
  std::vector<double> bad{1, std::numeric_limits<double>::quiet_NaN(), 3};
  CHECK_THROWS_AS(FitHuber(bad, std::vector<double>{1, 2, 3}), ValidationError);
  HuberOptions opts;
  opts.delta = 0;
  CHECK_THROWS_AS(FitHuber(std::vector<double>{1, 2}, std::vector<double>{1, 2}, opts),
                  ValidationError);
}

TEST_CASE("model set recovers the zero-noise generator") {
  auto ds = telemetry::GenerateSyntheticCluster(CleanSpec(), 1);
  for (bool daily : {false, true}) {
    FitOptions o;
    o.daily_aggregation = daily;
    o.min_samples = 10;
    auto s = FitModelSet(ds, "g", o);
    CHECK(std::fabs(s.g.slope - 9) <= 1e-6);
    CHECK(std::fabs(s.g.intercept - 2) <= 1e-6);
    CHECK(std::fabs(s.h.slope - 1.3) <= 1e-6);
    CHECK(std::fabs(s.h.intercept - 1) <= 1e-6);
    CHECK(std::fabs(s.f.slope - 0.07) <= 1e-6);
    CHECK(std::fabs(s.f.intercept - 6) <= 1e-6);
  }
  auto r = FitResourceModels(ds, "g");
  CHECK(std::fabs(r.p.slope - 21) <= 1e-6);
  CHECK(std::fabs(r.p.intercept - 40) <= 1e-6);
  CHECK(std::fabs(r.q.slope - 3.5) <= 1e-6);
  REQUIRE(r.beta_samples.size() == ds.observations.size());
  for (const auto& [bs, br] : r.beta_samples) {
    CHECK(bs == doctest::Approx(21).epsilon(1e-9));
    CHECK(br == doctest::Approx(3.5).epsilon(1e-9));
  }
}

TEST_CASE("m_current statistics") {
  auto ds = telemetry::GenerateSyntheticCluster(CleanSpec(), 1);
  std::vector<double> c;
  for (const auto& o : ds.observations) c.push_back(o.running_containers);
  std::sort(c.begin(), c.end());

  FitOptions o;
  CHECK(FitModelSet(ds, "g", o).m_current == Median(c));
  o.m_current_stat = CenterStat::kMean;
  CHECK(FitModelSet(ds, "g", o).m_current ==
        doctest::Approx(std::accumulate(c.begin(), c.end(), 0.0) / c.size()));
  o.m_current_percentile = 0.9;
  CHECK(FitModelSet(ds, "g", o).m_current == oracle::LowerQuantileBySort(c, 0.9));
  o.m_current_percentile = 1.0;
  CHECK_THROWS_AS(FitModelSet(ds, "g", o), ValidationError);

  CHECK(Median({10, 20, 30}) == 20);
  CHECK(Median({30, 10, 20, 40}) == 25);
}

TEST_CASE("model set errors") {
  auto ds = telemetry::GenerateSyntheticCluster(CleanSpec(), 1);
  CHECK_THROWS_AS(FitModelSet(ds, "missing"), ValidationError);
  FitOptions o;
  o.min_samples = ds.observations.size() + 1;
  CHECK_THROWS_AS(FitModelSet(ds, "g", o), ValidationError);

  auto idle = ds;
  for (auto& obs : idle.observations) obs.cores_used = 0;
  CHECK_THROWS_AS(FitResourceModels(idle, "g"), ValidationError);
}

TEST_CASE("model JSON round trip") {
  auto ds = telemetry::GenerateSyntheticCluster(CleanSpec(), 2);
  auto s = FitModelSet(ds, "g");
  auto r = FitResourceModels(ds, "g");
  CHECK(GroupModelSetFromJson(nlohmann::json::parse(ToJson(s).dump())) == s);
  CHECK(ResourceModelsFromJson(nlohmann::json::parse(ToJson(r).dump())) == r);
  auto j = nlohmann::json::parse(ToJson(s).dump());
  j["g"].erase("slope");
  CHECK_THROWS_AS(GroupModelSetFromJson(j), ValidationError);
}
