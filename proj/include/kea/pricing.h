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

// Off-peak token pricing and oversubscription.
//
// Customers whose work could start at hour X0 pick an hour X with a
// multinomial logit over the 24 hours of the day:
//
//   U(X) = alpha * dist(X, X0) + beta * price(X)
//   P(X) = exp(U(X)) / sum_x exp(U(x))
//
// alpha <= 0 penalizes moving away from X0, beta <= 0 penalizes price. A
// discounted token window pulls flexible demand into the window; the number
// of tokens offered is bounded by the idle capacity that is available with a
// given probability (the SLA). Scenarios combine oversubscription, the token
// offer and a cost model for overflow capacity.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "kea/telemetry.h"

namespace kea::pricing {

inline constexpr int kHoursPerDay = 24;
/// |alpha| or |beta| at or above this routes to the deterministic limit.
inline constexpr double kLimitMagnitude = 1e6;

using telemetry::DemandSeries;

/// Half-open hour-of-day interval [start, end) that may wrap midnight.
/// start == end is an empty window; end may be 24.
struct Window {
  int start = 16;
  int end = 24;

  bool Contains(int hour) const;
  int Length() const;
  void Validate() const;
};

struct PriceSchedule {
  double base_price = 1.0;
  Window window;
  double discount = 0.0;  // in [0, 1)

  double Price(int hour) const;
  void Validate() const;
};

struct ChoiceParams {
  double alpha = 0.0;  // time-shift sensitivity, <= 0
  double beta = 0.0;   // price sensitivity, <= 0

  void Validate() const;
};

enum class Distance { kCircular, kLinear };

int HourDistance(int x, int x0, Distance mode = Distance::kCircular);

double Utility(const ChoiceParams& params, int x, int x0, const PriceSchedule& prices,
               Distance mode = Distance::kCircular);

using Probabilities = std::array<double, kHoursPerDay>;

Probabilities ChoiceProbabilities(const ChoiceParams& params, int x0,
                                  const PriceSchedule& prices,
                                  Distance mode = Distance::kCircular);

/// Row x0 holds ChoiceProbabilities(params, x0, prices).
using ChoiceMatrix = std::vector<std::vector<double>>;
ChoiceMatrix BuildChoiceMatrix(const ChoiceParams& params, const PriceSchedule& prices,
                               Distance mode = Distance::kCircular);

/// Moves flexible_share of each hour's demand according to matrix rows, for a
/// day of any length H (matrix is H x H, rows summing to 1).
std::vector<double> RedistributeDay(const std::vector<double>& day, double flexible_share,
                                    const ChoiceMatrix& matrix);

struct ShiftResult {
  DemandSeries original;
  DemandSeries shifted;
  double flexible_share = 0;
  double window_gain = 0;  // sum over window hours of (shifted - original)
  int iterations = 0;      // cap-and-return passes (constrained shift only)
};

/// Demand must consist of whole days starting at 00:00. Each day is shifted
/// independently; high-priority and total demand shift with the same matrix.
ShiftResult ShiftDemand(const DemandSeries& demand, double flexible_share,
                        const ChoiceParams& params, const PriceSchedule& prices,
                        Distance mode = Distance::kCircular);

/// As ShiftDemand, but no hour may end up more than token_capacity above its
/// original demand: excess inflow is scaled back and returned to the hours it
/// came from, repeatedly, until every hour respects the cap.
ShiftResult ConstrainedShift(const DemandSeries& demand, double flexible_share,
                             const ChoiceParams& params, const PriceSchedule& prices,
                             double token_capacity, Distance mode = Distance::kCircular);

/// Flow form of the constrained shift for one day of H hours: flows[x0][x]
/// is the flexible demand originating at x0 that runs at x.
struct DayFlows {
  std::vector<double> inflexible;
  std::vector<std::vector<double>> flows;
  int iterations = 0;

  std::vector<double> Totals() const;
  /// Per-origin shares of the flexible flow; rows without flow keep `fallback`.
  ChoiceMatrix RowShares(const ChoiceMatrix& fallback) const;
};
DayFlows CapAndReturn(const std::vector<double>& day, double flexible_share,
                      const ChoiceMatrix& matrix, double token_capacity);

/// Tokens per hour that stay idle over the whole window on at least an `sla`
/// fraction of days: lower quantile at (1 - sla) of per-day minimum idle
/// capacity in the window, floored at 0.
double PerfTokenAvailability(const DemandSeries& demand, double capacity, const Window& window,
                             double sla);

/// Scales both priority classes by (1 + ratio).
DemandSeries ApplyOversubscription(const DemandSeries& demand, double ratio);

// -- Maximum likelihood ----------------------------------------------------------

struct ChoiceObservation {
  int origin_hour = 0;  // X0
  int chosen_hour = 0;  // X

  bool operator==(const ChoiceObservation&) const = default;
};

double LogLikelihood(const std::vector<ChoiceObservation>& choices, const PriceSchedule& prices,
                     const ChoiceParams& params, Distance mode = Distance::kCircular);

/// (d/d alpha, d/d beta) of the total log-likelihood.
std::pair<double, double> LogLikelihoodGradient(const std::vector<ChoiceObservation>& choices,
                                                const PriceSchedule& prices,
                                                const ChoiceParams& params,
                                                Distance mode = Distance::kCircular);

struct MleOptions {
  int max_iters = 500;
  double tol = 1e-8;  // on the per-observation projected gradient, inf-norm
  Distance mode = Distance::kCircular;
};

struct MleResult {
  ChoiceParams params;
  double log_likelihood = 0;
  int iterations = 0;
  bool converged = false;
};

/// Projected Newton ascent (Fisher-information scaled gradient with Armijo
/// backtracking) on alpha, beta <= 0. On non-convergence returns the best
/// iterate with converged = false.
MleResult FitLogitMle(const std::vector<ChoiceObservation>& choices, const PriceSchedule& prices,
                      const ChoiceParams& init, const MleOptions& options = {});

/// Draws n observations with uniformly random origin hours.
std::vector<ChoiceObservation> SampleChoices(const ChoiceParams& params,
                                             const PriceSchedule& prices, int n, uint64_t seed,
                                             Distance mode = Distance::kCircular);

// -- Scenarios ----------------------------------------------------------------------

struct FinanceConfig {
  double base_cost_per_slot_hour = 1.0;
  double adhoc_premium = 3.0;
  double base_token_price = 1.0;

  void Validate() const;
};

struct ScenarioKnobs {
  double discount = 0.0;
  double oversub_ratio = 0.0;
  Window window;
  double sla = 0.75;
};

struct PricingScenario {
  double discount = 0;
  double oversub_ratio = 0;
  Window window;
  int window_hours = 0;
  double sla = 0;
  double tokens_available = 0;
  double cost_per_container = 0;
  double total_cost = 0;
  double total_containers = 0;
  double peak_overflow = 0;
  double revenue = 0;
};

struct ScenarioInputs {
  double capacity = 0;
  double flexible_share = 0.3;
  ChoiceParams params{-0.5, -2.0};
  FinanceConfig finance;
  Distance mode = Distance::kCircular;
};

struct FinanceOutcome {
  double total_cost = 0;
  double total_containers = 0;
  double cost_per_container = 0;
  double peak_overflow = 0;
  double revenue = 0;
};

/// Capacity cost for every hour plus premium-priced overflow above capacity.
FinanceOutcome EvaluateFinance(const DemandSeries& served, double capacity,
                               const FinanceConfig& finance, const PriceSchedule& prices);

struct ScenarioDetail {
  PricingScenario scenario;
  ShiftResult shift;
};

/// oversubscribe -> token availability -> constrained shift -> finance.
/// A zero discount offers no incentive, so demand is not shifted.
ScenarioDetail EvaluateScenarioDetailed(const DemandSeries& demand, const ScenarioKnobs& knobs,
                                        const ScenarioInputs& inputs);
PricingScenario EvaluateScenario(const DemandSeries& demand, const ScenarioKnobs& knobs,
                                 const ScenarioInputs& inputs);

struct ScenarioGrid {
  std::vector<double> discounts;
  std::vector<double> oversub_ratios;
  std::vector<int> window_hours;  // window durations anchored at window_start
  std::vector<double> slas;
  int window_start = 16;

  std::size_t size() const;
  /// 10 discounts x 8 ratios x 4 durations x 5 SLAs = 1600.
  static ScenarioGrid Default();
};

struct ScenarioTable {
  std::vector<PricingScenario> rows;  // discount-major, then ratio, duration, SLA
  PricingScenario best;
  std::size_t best_index = 0;
};

/// Lowest cost per container; ties prefer a smaller ratio, then a smaller
/// discount, then the earlier row.
ScenarioTable EnumerateScenarios(const DemandSeries& demand, const ScenarioGrid& grid,
                                 const ScenarioInputs& inputs);

inline constexpr std::string_view kScenarioHeader =
    "discount,oversub_ratio,window_start,window_end,sla,tokens_available,total_containers,"
    "peak_overflow,total_cost,cost_per_container";

void SaveScenarioCsv(const std::vector<PricingScenario>& rows, const std::filesystem::path& path);
/// Demand schema plus a trailing `series` column (original / shifted).
void SaveShiftedDemandCsv(const ShiftResult& shift, const std::filesystem::path& path);

}  // namespace kea::pricing
