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
#include <numeric>
#include <random>

#include "kea/common.h"
#include "kea/pricing.h"
#include "oracles.h"

using namespace kea;
using namespace kea::pricing;
namespace fs = std::filesystem;

namespace {

double Sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

DemandSeries Days(const std::vector<std::vector<double>>& days) {
  DemandSeries d;
  for (const auto& day : days)
    for (double v : day) {
      d.hours.push_back(473352 + static_cast<telemetry::UtcHour>(d.hours.size()));
      d.total.push_back(v);
      d.high_priority.push_back(0.25 * v);
    }
  return d;
}

// Day with a constant level inside [16, 24) and a lower level elsewhere.
std::vector<double> Evening(double inside, double outside) {
  std::vector<double> day(24, outside);
  for (int h = 16; h < 24; ++h) day[h] = inside;
  return day;
}

}  // namespace

TEST_CASE("window membership and length") {
  Window evening{16, 24};
  CHECK(evening.Length() == 8);
  CHECK(evening.Contains(16));
  CHECK(evening.Contains(23));
  CHECK_FALSE(evening.Contains(15));
  CHECK_FALSE(evening.Contains(0));

  Window wrap{22, 2};
  CHECK(wrap.Length() == 4);
  for (int h : {22, 23, 0, 1}) CHECK(wrap.Contains(h));
  for (int h : {2, 21, 12}) CHECK_FALSE(wrap.Contains(h));

  Window empty{5, 5};
  CHECK(empty.Length() == 0);
  CHECK_FALSE(empty.Contains(5));
  CHECK(Window{0, 24}.Length() == 24);
  CHECK_THROWS_AS((Window{24, 3}.Validate()), ValidationError);
  CHECK_THROWS_AS((Window{3, 25}.Validate()), ValidationError);
}

TEST_CASE("hour distance") {
  CHECK(HourDistance(23, 0) == 1);
  CHECK(HourDistance(23, 0, Distance::kLinear) == 23);
  CHECK(HourDistance(6, 18) == 12);
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b) {
      CHECK(HourDistance(a, b) == HourDistance(b, a));
      CHECK(HourDistance(a, b) <= 12);
    }
}

TEST_CASE("choice probabilities match the direct softmax and sum to one") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    ChoiceParams p{-3 * u(rng), -5 * u(rng)};
    PriceSchedule s{0.5 + u(rng), {static_cast<int>(24 * u(rng)), static_cast<int>(25 * u(rng))},
                    0.9 * u(rng)};
    auto mode = i % 2 ? Distance::kLinear : Distance::kCircular;
    int x0 = i % 24;
    auto probs = ChoiceProbabilities(p, x0, s, mode);
    double total = 0;
    for (int x = 0; x < 24; ++x) {
      double ref = static_cast<double>(
          oracle::LogitProbability(p.alpha, p.beta, x, x0, s, mode == Distance::kCircular));
      CHECK(std::fabs(probs[x] - ref) <= 1e-12);
      total += probs[x];
    }
    CHECK(std::fabs(total - 1) <= 1e-12);
  }
  CHECK_THROWS_AS(ChoiceProbabilities({0.1, 0}, 0, {}), ValidationError);
  CHECK_THROWS_AS(ChoiceProbabilities({0, 0}, 24, {}), ValidationError);
}

TEST_CASE("limit parameters") {
  PriceSchedule s{1.0, {16, 24}, 0.5};
  auto stay = ChoiceProbabilities({-1e6, -1}, 7, s);
  CHECK(stay[7] == 1.0);
  CHECK(std::accumulate(stay.begin(), stay.end(), 0.0) == 1.0);
  // Infinitely price sensitive with no time preference: uniform over the window.
  auto cheap = ChoiceProbabilities({0, -1e6}, 3, s);
  for (int x = 0; x < 24; ++x) CHECK(cheap[x] == doctest::Approx(x >= 16 ? 1.0 / 8 : 0.0));
}

TEST_CASE("two-hour redistribution") {
  ChoiceMatrix m{{0.2, 0.8}, {0.5, 0.5}};
  auto out = RedistributeDay({100, 0}, 0.5, m);
  CHECK(out[0] == doctest::Approx(60));
  CHECK(out[1] == doctest::Approx(40));
  CHECK(RedistributeDay({100, 0}, 0.0, m) == std::vector<double>{100, 0});
  CHECK_THROWS_AS(RedistributeDay({100, 0}, 1.5, m), ValidationError);
  CHECK_THROWS_AS(RedistributeDay({100, 0, 1}, 0.5, m), ValidationError);
}

TEST_CASE("unconstrained shift conserves demand") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    auto d = oracle::RandomDemand(rng, 3, 400);
    PriceSchedule s{1.0, {16, 24}, 0.05 * (i % 19)};
    auto r = ShiftDemand(d, 0.1 + 0.02 * i, {-0.4, -2.0}, s);
    for (std::size_t day = 0; day < 3; ++day) {
      double before = 0, after = 0;
      for (std::size_t h = 0; h < 24; ++h) {
        before += d.total[day * 24 + h];
        after += r.shifted.total[day * 24 + h];
        CHECK(r.shifted.high_priority[day * 24 + h] <= r.shifted.total[day * 24 + h]);
      }
      CHECK(std::fabs(after - before) <= 1e-9 * before);
    }
    double gain = 0;
    for (std::size_t t = 0; t < d.size(); ++t)
      if (t % 24 >= 16) gain += r.shifted.total[t] - d.total[t];
    CHECK(r.window_gain == doctest::Approx(gain));
  }
}

TEST_CASE("zero flexible share and zero price sensitivity") {
  std::mt19937_64 rng(3);
  auto d = oracle::RandomDemand(rng, 2, 300);
  PriceSchedule cheap{1.0, {16, 24}, 0.6};
  PriceSchedule flat{1.0, {16, 24}, 0.0};
  auto none = ShiftDemand(d, 0.0, {-0.5, -2.0}, cheap);
  for (std::size_t t = 0; t < d.size(); ++t)
    CHECK(none.shifted.total[t] == doctest::Approx(d.total[t]).epsilon(1e-12));
  // Without price sensitivity a discount moves nothing extra.
  auto a = ShiftDemand(d, 0.3, {-0.5, 0.0}, cheap);
  auto b = ShiftDemand(d, 0.3, {-0.5, 0.0}, flat);
  CHECK(a.shifted == b.shifted);
  // A fully rigid time preference keeps every job in place.
  auto rigid = ShiftDemand(d, 0.3, {-1e6, -2.0}, cheap);
  for (std::size_t t = 0; t < d.size(); ++t)
    CHECK(rigid.shifted.total[t] == doctest::Approx(d.total[t]).epsilon(1e-12));
}

TEST_CASE("window gain grows with the discount") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    auto d = oracle::RandomDemand(rng, 2, 200);
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 18; ++k) {
      PriceSchedule s{1.0, {16, 24}, 0.05 * k};
      double gain = ShiftDemand(d, 0.4, {-0.3, -3.0}, s).window_gain;
      CHECK(gain >= prev - 1e-9);
      prev = gain;
    }
  }
}

TEST_CASE("cap and return on a three-hour day") {
  ChoiceMatrix m{{0, 0.5, 0.5}, {0, 1, 0}, {0, 0, 1}};
  auto f = CapAndReturn({100, 0, 0}, 1.0, m, 20);
  auto t = f.Totals();
  CHECK(t[0] == doctest::Approx(60));
  CHECK(t[1] == doctest::Approx(20));
  CHECK(t[2] == doctest::Approx(20));
  CHECK(f.iterations == 2);
  auto shares = f.RowShares(m);
  CHECK(shares[0][0] == doctest::Approx(0.6));
  CHECK(shares[0][1] == doctest::Approx(0.2));
  CHECK(shares[1] == m[1]);
  CHECK_THROWS_AS(CapAndReturn({100, 0, 0}, 1.0, m, -1), ValidationError);
}

TEST_CASE("cap and return properties") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PriceSchedule s{1.0, {16, 24}, 0.5};
  auto m = BuildChoiceMatrix({-0.3, -3.0}, s);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> day(24);
    for (double& v : day) v = 1000 * u(rng);
    double share = u(rng), cap = 200 * u(rng);
    auto f = CapAndReturn(day, share, m, cap);
    auto t = f.Totals();
    double tol = 1e-9 * (1 + *std::max_element(day.begin(), day.end()));
    CHECK(std::fabs(Sum(t) - Sum(day)) <= 24 * tol);
    for (int x = 0; x < 24; ++x) {
      CHECK(t[x] - day[x] <= cap + tol);
      double inflow = 0;
      bool trimmed = false;
      for (int x0 = 0; x0 < 24; ++x0) {
        CHECK(f.flows[x0][x] >= 0);
        if (x0 == x) continue;
        inflow += f.flows[x0][x];
        trimmed |= f.flows[x0][x] < share * day[x0] * m[x0][x] * (1 - 1e-12);
      }
      // A trimmed hour is filled exactly to the cap unless nothing is left to trim.
      if (trimmed && inflow > tol) CHECK(std::fabs(t[x] - day[x] - cap) <= tol);
    }
  }
}

TEST_CASE("constrained shift limits") {
  std::mt19937_64 rng(6);
  auto d = oracle::RandomDemand(rng, 3, 500);
  PriceSchedule s{1.0, {16, 24}, 0.5};
  ChoiceParams p{-0.3, -3.0};
  auto free = ShiftDemand(d, 0.4, p, s);
  auto slack = ConstrainedShift(d, 0.4, p, s, 1e12);
  for (std::size_t t = 0; t < d.size(); ++t)
    CHECK(slack.shifted.total[t] == doctest::Approx(free.shifted.total[t]).epsilon(1e-12));
  auto zero = ConstrainedShift(d, 0.4, p, s, 0.0);
  for (std::size_t t = 0; t < d.size(); ++t)
    CHECK(zero.shifted.total[t] == doctest::Approx(d.total[t]).epsilon(1e-9));
  CHECK(std::fabs(zero.window_gain) <= 1e-6);
  for (double cap : {5.0, 20.0, 80.0}) {
    auto r = ConstrainedShift(d, 0.4, p, s, cap);
    for (std::size_t t = 0; t < d.size(); ++t)
      CHECK(r.shifted.total[t] - d.total[t] <= cap + 1e-6);
    CHECK(r.window_gain <= free.window_gain + 1e-6);
  }
  CHECK_THROWS_AS(ConstrainedShift(d, 0.4, p, s, -1), ValidationError);
}

TEST_CASE("shift needs whole contiguous days") {
  auto d = Days({Evening(10, 5)});
  d.hours.pop_back();
  d.total.pop_back();
  d.high_priority.pop_back();
  CHECK_THROWS_AS(ShiftDemand(d, 0.3, {}, {}), ValidationError);
  auto late = Days({Evening(10, 5)});
  for (auto& h : late.hours) h += 1;
  CHECK_THROWS_AS(ShiftDemand(late, 0.3, {}, {}), ValidationError);
}

TEST_CASE("token availability") {
  // Window minima of idle capacity are 100, 200, 300, 400 across four days.
  auto d = Days({Evening(900, 10), Evening(800, 10), Evening(700, 10), Evening(600, 10)});
  CHECK(PerfTokenAvailability(d, 1000, {16, 24}, 0.75) == 100);
  CHECK(PerfTokenAvailability(d, 1000, {16, 24}, 0.5) == 200);
  auto flat = Days({std::vector<double>(24, 500), std::vector<double>(24, 500)});
  CHECK(PerfTokenAvailability(flat, 1000, {16, 24}, 0.9) == 500);
  CHECK(PerfTokenAvailability(flat, 400, {16, 24}, 0.9) == 0);
  CHECK_THROWS_AS(PerfTokenAvailability(flat, 1000, {16, 24}, 1.0), ValidationError);
  CHECK_THROWS_AS(PerfTokenAvailability(flat, 1000, {5, 5}, 0.5), ValidationError);
  CHECK_THROWS_AS(PerfTokenAvailability(Days({Evening(1, 1)}), 1000, {16, 24}, 0.5),
                  ValidationError);
}

TEST_CASE("oversubscription scales demand") {
  auto d = Days({std::vector<double>(24, 100)});
  d.total[1] = 200;
  auto o = ApplyOversubscription(d, 0.1);
  CHECK(o.total[0] == doctest::Approx(110));
  CHECK(o.total[1] == doctest::Approx(220));
  CHECK(o.high_priority[1] == doctest::Approx(27.5));
  CHECK(ApplyOversubscription(d, 0) == d);
  CHECK_THROWS_AS(ApplyOversubscription(d, -0.1), ValidationError);
}

TEST_CASE("finance arithmetic") {
  DemandSeries served;
  served.hours = {473352 + 16, 473352 + 17};
  served.total = {8, 13};
  served.high_priority = {0, 0};
  PriceSchedule s{2.0, {17, 18}, 0.5};
  auto f = EvaluateFinance(served, 10, {1.0, 3.0, 2.0}, s);
  CHECK(f.total_cost == doctest::Approx(10 * 2 + 3 * 3));
  CHECK(f.total_containers == 21);
  CHECK(f.cost_per_container == doctest::Approx(29.0 / 21));
  CHECK(f.peak_overflow == 3);
  CHECK(f.revenue == doctest::Approx(8 * 2 + 13 * 1));
  served.total = {0, 0};
  CHECK_THROWS_AS(EvaluateFinance(served, 10, {}, s), RuntimeError);
}

TEST_CASE("zero discount leaves demand unshifted") {
  std::mt19937_64 rng(7);
  auto d = oracle::RandomDemand(rng, 4, 300);
  ScenarioInputs in;
  in.capacity = 600;
  auto r = EvaluateScenarioDetailed(d, {0.0, 0.1, {16, 24}, 0.75}, in);
  CHECK(r.shift.shifted == ApplyOversubscription(d, 0.1));
  CHECK(r.shift.window_gain == 0);
}

TEST_CASE("scenario table is deterministic and picks the cheapest row") {
  std::mt19937_64 rng(8);
  auto d = oracle::RandomDemand(rng, 5, 300);
  ScenarioGrid g;
  g.discounts = {0.1, 0.3};
  g.oversub_ratios = {0.0, 0.2};
  g.window_hours = {4, 10};
  g.slas = {0.5, 0.9};
  g.window_start = 20;
  ScenarioInputs in;
  in.capacity = 450;
  SetWorkerCount(1);
  auto one = EnumerateScenarios(d, g, in);
  SetWorkerCount(4);
  auto four = EnumerateScenarios(d, g, in);
  SetWorkerCount(0);
  REQUIRE(one.rows.size() == 16);
  CHECK(one.best_index == four.best_index);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].total_cost == four.rows[i].total_cost);
    CHECK(one.rows[i].cost_per_container >= one.best.cost_per_container);
  }
  // Wrapping windows: 20 + 10 hours ends at 6.
  CHECK(one.rows[0].window.end == 24);
  CHECK(one.rows[0].window_hours == 4);
  CHECK(one.rows[2].window.end == 6);
  CHECK(one.rows[2].window_hours == 10);

  auto path = fs::temp_directory_path() / "kea_test_scenarios.csv";
  SaveScenarioCsv(one.rows, path);
  auto text = oracle::Slurp(path);
  CHECK(text.rfind(std::string(kScenarioHeader) + "\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 17);
  CHECK(ScenarioGrid::Default().size() == 1600);
}

TEST_CASE("log-likelihood and gradient") {
  PriceSchedule s{2.0, {16, 24}, 0.8};
  ChoiceParams truth{-0.3, -1.5};
  auto choices = SampleChoices(truth, s, 500, 3);
  CHECK(choices == SampleChoices(truth, s, 500, 3));
  long double ref = 0;
  for (const auto& c : choices)
    ref += std::log(oracle::LogitProbability(truth.alpha, truth.beta, c.chosen_hour,
                                             c.origin_hour, s));
  CHECK(LogLikelihood(choices, s, truth) == doctest::Approx(static_cast<double>(ref)));
  auto fit = FitLogitMle(choices, s, {-0.1, -0.1});
  CHECK(fit.converged);
  auto [ga, gb] = LogLikelihoodGradient(choices, s, fit.params);
  CHECK(std::fabs(ga) / choices.size() < 1e-6);
  CHECK(std::fabs(gb) / choices.size() < 1e-6);
  CHECK(fit.log_likelihood >= LogLikelihood(choices, s, truth));
  CHECK_THROWS_AS(LogLikelihood({}, s, truth), ValidationError);
  CHECK_THROWS_AS(FitLogitMle(choices, s, {-1e6, 0}), ValidationError);
}
