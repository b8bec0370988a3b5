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

#include "kea/pricing.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "kea/common.h"

namespace kea::pricing {

using telemetry::HourOfDay;

// -- Prices and utilities ---------------------------------------------------------

bool Window::Contains(int hour) const {
  int len = Length();
  if (len == 0) return false;
  return ((hour - start) % kHoursPerDay + kHoursPerDay) % kHoursPerDay < len;
}

int Window::Length() const {
  if (end == start) return 0;
  return end > start ? end - start : end + kHoursPerDay - start;
}

void Window::Validate() const {
  if (start < 0 || start > 23 || end < 0 || end > 24)
    throw ValidationError("window bounds must satisfy 0 <= start <= 23, 0 <= end <= 24");
}

double PriceSchedule::Price(int hour) const {
  return window.Contains(hour) ? base_price * (1.0 - discount) : base_price;
}

void PriceSchedule::Validate() const {
  if (!(base_price > 0) || !std::isfinite(base_price))
    throw ValidationError("base price must be positive");
  if (!(discount >= 0 && discount < 1)) throw ValidationError("discount must lie in [0, 1)");
  window.Validate();
}

void ChoiceParams::Validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw ValidationError("choice parameters must be finite");
  if (alpha > 0 || beta > 0) throw ValidationError("choice parameters must be <= 0");
}

namespace {
void CheckHour(int h, const char* what) {
  if (h < 0 || h >= kHoursPerDay)
    throw ValidationError(std::string(what) + " must lie in 0..23, got " + std::to_string(h));
}
}  // namespace

int HourDistance(int x, int x0, Distance mode) {
  int d = std::abs(x - x0);
  return mode == Distance::kCircular ? std::min(d, kHoursPerDay - d) : d;
}

double Utility(const ChoiceParams& params, int x, int x0, const PriceSchedule& prices,
               Distance mode) {
  CheckHour(x, "hour");
  CheckHour(x0, "origin hour");
  return params.alpha * HourDistance(x, x0, mode) + params.beta * prices.Price(x);
}

Probabilities ChoiceProbabilities(const ChoiceParams& params, int x0,
                                  const PriceSchedule& prices, Distance mode) {
  params.Validate();
  prices.Validate();
  CheckHour(x0, "origin hour");
  Probabilities p{};
  if (params.alpha <= -kLimitMagnitude) {
    p[x0] = 1.0;
    return p;
  }
  std::array<bool, kHoursPerDay> allowed;
  allowed.fill(true);
  ChoiceParams effective = params;
  if (params.beta <= -kLimitMagnitude) {
    // Infinitely price sensitive: only the cheapest hours survive, and the
    // time term decides among them.
    double cheapest = std::numeric_limits<double>::infinity();
    for (int x = 0; x < kHoursPerDay; ++x) cheapest = std::min(cheapest, prices.Price(x));
    for (int x = 0; x < kHoursPerDay; ++x) allowed[x] = prices.Price(x) == cheapest;
    effective.beta = 0.0;
  }
  std::array<double, kHoursPerDay> u;
  double umax = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < kHoursPerDay; ++x) {
    if (!allowed[x]) continue;
    u[x] = effective.alpha * HourDistance(x, x0, mode) + effective.beta * prices.Price(x);
    umax = std::max(umax, u[x]);
  }
  double z = 0;
  for (int x = 0; x < kHoursPerDay; ++x) {
    p[x] = allowed[x] ? std::exp(u[x] - umax) : 0.0;
    z += p[x];
  }
  for (double& v : p) v /= z;
  return p;
}

ChoiceMatrix BuildChoiceMatrix(const ChoiceParams& params, const PriceSchedule& prices,
                               Distance mode) {
  ChoiceMatrix m(kHoursPerDay);
  for (int x0 = 0; x0 < kHoursPerDay; ++x0) {
    auto p = ChoiceProbabilities(params, x0, prices, mode);
    m[x0].assign(p.begin(), p.end());
  }
  return m;
}

// -- Shifting ---------------------------------------------------------------------

namespace {

void CheckShare(double s) {
  if (!(s >= 0 && s <= 1)) throw ValidationError("flexible share must lie in [0, 1]");
}

void CheckMatrix(const ChoiceMatrix& m, std::size_t h) {
  if (m.size() != h) throw ValidationError("choice matrix must be H x H");
  for (const auto& row : m)
    if (row.size() != h) throw ValidationError("choice matrix must be H x H");
}

void CheckWholeDays(const DemandSeries& d) {
  d.Validate();
  if (d.size() == 0) throw ValidationError("demand series is empty");
  if (d.size() % kHoursPerDay != 0 || HourOfDay(d.hours.front()) != 0)
    throw ValidationError("demand must cover whole days starting at 00:00");
  for (std::size_t t = 1; t < d.size(); ++t)
    if (d.hours[t] != d.hours[0] + static_cast<int64_t>(t))
      throw ValidationError("demand hours must be contiguous");
}

double WindowGain(const DemandSeries& before, const DemandSeries& after, const Window& w) {
  double gain = 0;
  for (std::size_t t = 0; t < before.size(); ++t)
    if (w.Contains(HourOfDay(before.hours[t]))) gain += after.total[t] - before.total[t];
  return gain;
}

// Applies, per day, the row-stochastic matrix returned by matrix_for(total
// day) to both priority classes, so high <= total is preserved.
template <typename MatrixFn>
DemandSeries MapDays(const DemandSeries& d, double flexible_share, MatrixFn&& matrix_for) {
  DemandSeries out = d;
  for (std::size_t start = 0; start < d.size(); start += kHoursPerDay) {
    std::vector<double> hi(d.high_priority.begin() + start,
                           d.high_priority.begin() + start + kHoursPerDay);
    std::vector<double> tot(d.total.begin() + start, d.total.begin() + start + kHoursPerDay);
    const ChoiceMatrix& m = matrix_for(tot);
    auto new_hi = RedistributeDay(hi, flexible_share, m);
    auto new_tot = RedistributeDay(tot, flexible_share, m);
    for (int h = 0; h < kHoursPerDay; ++h) {
      out.total[start + h] = new_tot[h];
      out.high_priority[start + h] = std::min(new_hi[h], new_tot[h]);
    }
  }
  return out;
}

}  // namespace

std::vector<double> RedistributeDay(const std::vector<double>& day, double flexible_share,
                                    const ChoiceMatrix& matrix) {
  CheckShare(flexible_share);
  CheckMatrix(matrix, day.size());
  std::vector<double> out(day.size());
  for (std::size_t x = 0; x < day.size(); ++x) out[x] = (1.0 - flexible_share) * day[x];
  for (std::size_t x0 = 0; x0 < day.size(); ++x0) {
    double flex = flexible_share * day[x0];
    for (std::size_t x = 0; x < day.size(); ++x) out[x] += flex * matrix[x0][x];
  }
  return out;
}

ShiftResult ShiftDemand(const DemandSeries& demand, double flexible_share,
                        const ChoiceParams& params, const PriceSchedule& prices, Distance mode) {
  CheckShare(flexible_share);
  CheckWholeDays(demand);
  ChoiceMatrix m = BuildChoiceMatrix(params, prices, mode);
  ShiftResult r;
  r.original = demand;
  r.flexible_share = flexible_share;
  r.shifted = MapDays(demand, flexible_share,
                      [&](const std::vector<double>&) -> const ChoiceMatrix& { return m; });
  r.window_gain = WindowGain(r.original, r.shifted, prices.window);
  return r;
}

ChoiceMatrix DayFlows::RowShares(const ChoiceMatrix& fallback) const {
  ChoiceMatrix m = fallback;
  for (std::size_t x0 = 0; x0 < flows.size(); ++x0) {
    double row = 0;
    for (double v : flows[x0]) row += v;
    if (row > 0)
      for (std::size_t x = 0; x < flows[x0].size(); ++x) m[x0][x] = flows[x0][x] / row;
  }
  return m;
}

std::vector<double> DayFlows::Totals() const {
  std::vector<double> t = inflexible;
  for (std::size_t x0 = 0; x0 < flows.size(); ++x0)
    for (std::size_t x = 0; x < flows[x0].size(); ++x) t[x] += flows[x0][x];
  return t;
}

DayFlows CapAndReturn(const std::vector<double>& day, double flexible_share,
                      const ChoiceMatrix& matrix, double token_capacity) {
  CheckShare(flexible_share);
  CheckMatrix(matrix, day.size());
  if (!(token_capacity >= 0)) throw ValidationError("token capacity must be >= 0");
  const std::size_t H = day.size();
  DayFlows f;
  f.inflexible.resize(H);
  f.flows.assign(H, std::vector<double>(H));
  double scale = 0;
  for (std::size_t x0 = 0; x0 < H; ++x0) {
    f.inflexible[x0] = (1.0 - flexible_share) * day[x0];
    for (std::size_t x = 0; x < H; ++x)
      f.flows[x0][x] = flexible_share * day[x0] * matrix[x0][x];
    scale = std::max(scale, day[x0]);
  }
  const double tol = 1e-12 * (1.0 + scale);
  constexpr int kMaxPasses = 100000;

  for (int pass = 0; pass < kMaxPasses; ++pass) {
    auto totals = f.Totals();
    bool over = false;
    // Inflow from other hours into x is only ever scaled down; what is removed
    // goes back to the diagonal (the origin keeps running it). Columns touched
    // here are disjoint from the diagonals they feed, so in-place updates are
    // equivalent to a simultaneous update.
    for (std::size_t x = 0; x < H; ++x) {
      double excess = totals[x] - day[x] - token_capacity;
      if (excess <= tol) continue;
      over = true;
      double inflow = 0;
      for (std::size_t x0 = 0; x0 < H; ++x0)
        if (x0 != x) inflow += f.flows[x0][x];
      double ratio = inflow > 0 ? std::min(1.0, excess / inflow) : 0.0;
      for (std::size_t x0 = 0; x0 < H; ++x0) {
        if (x0 == x) continue;
        double moved = f.flows[x0][x] * ratio;
        f.flows[x0][x] -= moved;
        f.flows[x0][x0] += moved;
      }
    }
    f.iterations = pass + 1;
    if (!over) return f;
  }
  throw RuntimeError("constrained shift did not settle");
}

ShiftResult ConstrainedShift(const DemandSeries& demand, double flexible_share,
                             const ChoiceParams& params, const PriceSchedule& prices,
                             double token_capacity, Distance mode) {
  CheckShare(flexible_share);
  CheckWholeDays(demand);
  if (!(token_capacity >= 0) || !std::isfinite(token_capacity))
    throw ValidationError("token capacity must be finite and >= 0");
  ChoiceMatrix m = BuildChoiceMatrix(params, prices, mode);
  ShiftResult r;
  r.original = demand;
  r.flexible_share = flexible_share;
  int passes = 0;
  ChoiceMatrix effective;
  r.shifted = MapDays(demand, flexible_share,
                      [&](const std::vector<double>& day) -> const ChoiceMatrix& {
                        DayFlows f = CapAndReturn(day, flexible_share, m, token_capacity);
                        passes = std::max(passes, f.iterations);
                        effective = f.RowShares(m);
                        return effective;
                      });
  r.iterations = passes;
  r.window_gain = WindowGain(r.original, r.shifted, prices.window);
  return r;
}

// -- Availability and oversubscription -------------------------------------------

double PerfTokenAvailability(const DemandSeries& demand, double capacity, const Window& window,
                             double sla) {
  demand.Validate();
  window.Validate();
  if (!(sla > 0 && sla < 1)) throw ValidationError("SLA must lie in (0, 1)");
  if (!(capacity >= 0) || !std::isfinite(capacity))
    throw ValidationError("capacity must be finite and >= 0");
  if (window.Length() == 0) throw ValidationError("token window is empty");

  struct DayIdle {
    double min_idle = std::numeric_limits<double>::infinity();
    int hours = 0;
  };
  std::map<int64_t, DayIdle> days;
  for (std::size_t t = 0; t < demand.size(); ++t) {
    int64_t h = demand.hours[t];
    if (!window.Contains(HourOfDay(h))) continue;
    auto& d = days[h >= 0 ? h / 24 : (h - 23) / 24];
    d.min_idle = std::min(d.min_idle, capacity - demand.total[t]);
    ++d.hours;
  }
  std::vector<double> mins;
  for (const auto& [day, d] : days)
    if (d.hours == window.Length()) mins.push_back(d.min_idle);
  if (mins.size() < 2)
    throw ValidationError("token availability needs at least two full days of demand");
  return std::max(0.0, LowerQuantile(std::move(mins), 1.0 - sla));
}

DemandSeries ApplyOversubscription(const DemandSeries& demand, double ratio) {
  if (!(ratio >= 0) || !std::isfinite(ratio))
    throw ValidationError("oversubscription ratio must be >= 0");
  DemandSeries out = demand;
  for (auto& v : out.total) v *= 1.0 + ratio;
  for (auto& v : out.high_priority) v *= 1.0 + ratio;
  return out;
}

// -- Maximum likelihood ------------------------------------------------------------

namespace {

using CountTable = std::array<std::array<double, kHoursPerDay>, kHoursPerDay>;

CountTable Tabulate(const std::vector<ChoiceObservation>& choices) {
  if (choices.empty()) throw ValidationError("need at least one choice observation");
  CountTable n{};
  for (const auto& c : choices) {
    CheckHour(c.origin_hour, "origin hour");
    CheckHour(c.chosen_hour, "chosen hour");
    n[c.origin_hour][c.chosen_hour] += 1.0;
  }
  return n;
}

struct Moments {
  double ll = 0;
  double g_alpha = 0, g_beta = 0;
  double v_aa = 0, v_ab = 0, v_bb = 0;  // summed covariance (Fisher information)
};

// Non-limit parameters only.
Moments Evaluate(const CountTable& n, const PriceSchedule& prices, const ChoiceParams& params,
                 Distance mode) {
  Moments m;
  for (int x0 = 0; x0 < kHoursPerDay; ++x0) {
    double row = 0;
    for (int x = 0; x < kHoursPerDay; ++x) row += n[x0][x];
    if (row == 0) continue;
    std::array<double, kHoursPerDay> u;
    double umax = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < kHoursPerDay; ++x) {
      u[x] = params.alpha * HourDistance(x, x0, mode) + params.beta * prices.Price(x);
      umax = std::max(umax, u[x]);
    }
    double z = 0;
    for (int x = 0; x < kHoursPerDay; ++x) z += std::exp(u[x] - umax);
    double log_z = umax + std::log(z);
    double ed = 0, eD = 0, edd = 0, edD = 0, eDD = 0;
    for (int x = 0; x < kHoursPerDay; ++x) {
      double p = std::exp(u[x] - log_z);
      double d = HourDistance(x, x0, mode), D = prices.Price(x);
      ed += p * d;
      eD += p * D;
      edd += p * d * d;
      edD += p * d * D;
      eDD += p * D * D;
    }
    for (int x = 0; x < kHoursPerDay; ++x) {
      if (n[x0][x] == 0) continue;
      m.ll += n[x0][x] * (u[x] - log_z);
      m.g_alpha += n[x0][x] * HourDistance(x, x0, mode);
      m.g_beta += n[x0][x] * prices.Price(x);
    }
    m.g_alpha -= row * ed;
    m.g_beta -= row * eD;
    m.v_aa += row * (edd - ed * ed);
    m.v_ab += row * (edD - ed * eD);
    m.v_bb += row * (eDD - eD * eD);
  }
  return m;
}

bool IsLimit(const ChoiceParams& p) {
  return p.alpha <= -kLimitMagnitude || p.beta <= -kLimitMagnitude;
}

}  // namespace

double LogLikelihood(const std::vector<ChoiceObservation>& choices, const PriceSchedule& prices,
                     const ChoiceParams& params, Distance mode) {
  params.Validate();
  prices.Validate();
  CountTable n = Tabulate(choices);
  if (IsLimit(params)) {
    double ll = 0;
    for (int x0 = 0; x0 < kHoursPerDay; ++x0) {
      auto p = ChoiceProbabilities(params, x0, prices, mode);
      for (int x = 0; x < kHoursPerDay; ++x)
        if (n[x0][x] > 0) ll += n[x0][x] * std::log(p[x]);
    }
    return ll;
  }
  return Evaluate(n, prices, params, mode).ll;
}

std::pair<double, double> LogLikelihoodGradient(const std::vector<ChoiceObservation>& choices,
                                                const PriceSchedule& prices,
                                                const ChoiceParams& params, Distance mode) {
  params.Validate();
  prices.Validate();
  if (IsLimit(params)) throw ValidationError("gradient undefined at limit parameters");
  Moments m = Evaluate(Tabulate(choices), prices, params, mode);
  return {m.g_alpha, m.g_beta};
}

MleResult FitLogitMle(const std::vector<ChoiceObservation>& choices, const PriceSchedule& prices,
                      const ChoiceParams& init, const MleOptions& options) {
  prices.Validate();
  init.Validate();
  if (IsLimit(init)) throw ValidationError("MLE cannot start at limit parameters");
  if (options.max_iters < 1) throw ValidationError("max_iters must be >= 1");
  CountTable n = Tabulate(choices);
  const double N = static_cast<double>(choices.size());

  auto projected_norm = [&](const ChoiceParams& p, const Moments& m) {
    double ga = (p.alpha >= 0 && m.g_alpha > 0) ? 0.0 : m.g_alpha;
    double gb = (p.beta >= 0 && m.g_beta > 0) ? 0.0 : m.g_beta;
    return std::max(std::abs(ga), std::abs(gb)) / N;
  };

  MleResult res;
  res.params = init;
  Moments cur = Evaluate(n, prices, res.params, options.mode);
  for (int it = 1; it <= options.max_iters; ++it) {
    res.iterations = it;
    if (projected_norm(res.params, cur) < options.tol) {
      res.converged = true;
      break;
    }
    // Newton direction with the (ridged) Fisher information; falls back to
    // the gradient when the information is singular (e.g. flat prices).
    double ridge = 1e-10 * (cur.v_aa + cur.v_bb) + 1e-12 * N;
    double a = cur.v_aa + ridge, b = cur.v_ab, d = cur.v_bb + ridge;
    double det = a * d - b * b;
    double da, db;
    if (det > 0) {
      da = (d * cur.g_alpha - b * cur.g_beta) / det;
      db = (a * cur.g_beta - b * cur.g_alpha) / det;
    } else {
      da = cur.g_alpha / N;
      db = cur.g_beta / N;
    }
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      ChoiceParams trial{std::min(0.0, res.params.alpha + step * da),
                         std::min(0.0, res.params.beta + step * db)};
      if (IsLimit(trial)) continue;
      Moments next = Evaluate(n, prices, trial, options.mode);
      double gain = cur.g_alpha * (trial.alpha - res.params.alpha) +
                    cur.g_beta * (trial.beta - res.params.beta);
      // Near the optimum the change in ll drops below its rounding noise;
      // such steps are accepted so Newton can finish on the gradient test.
      double noise = 64 * std::numeric_limits<double>::epsilon() * std::abs(cur.ll);
      if (next.ll >= cur.ll + 1e-4 * gain - noise) {
        res.params = trial;
        cur = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.converged = projected_norm(res.params, cur) < options.tol;
      break;
    }
  }
  if (!res.converged) res.converged = projected_norm(res.params, cur) < options.tol;
  res.log_likelihood = cur.ll;
  return res;
}

std::vector<ChoiceObservation> SampleChoices(const ChoiceParams& params,
                                             const PriceSchedule& prices, int n, uint64_t seed,
                                             Distance mode) {
  if (n < 0) throw ValidationError("sample size must be >= 0");
  ChoiceMatrix m = BuildChoiceMatrix(params, prices, mode);
  std::vector<std::discrete_distribution<int>> rows;
  for (const auto& row : m) rows.emplace_back(row.begin(), row.end());
  Rng rng = SubStream(seed, std::string_view("logit-choices"));
  std::uniform_int_distribution<int> origin(0, kHoursPerDay - 1);
  std::vector<ChoiceObservation> out(n);
  for (auto& c : out) {
    c.origin_hour = origin(rng);
    c.chosen_hour = rows[c.origin_hour](rng);
  }
  return out;
}

// -- Scenarios ----------------------------------------------------------------------

void FinanceConfig::Validate() const {
  if (!(base_cost_per_slot_hour >= 0) || !(adhoc_premium >= 0) || !(base_token_price > 0))
    throw ValidationError("finance config values must be non-negative (token price positive)");
}

FinanceOutcome EvaluateFinance(const DemandSeries& served, double capacity,
                               const FinanceConfig& finance, const PriceSchedule& prices) {
  finance.Validate();
  FinanceOutcome f;
  const double hours = static_cast<double>(served.size());
  f.total_cost = capacity * finance.base_cost_per_slot_hour * hours;
  for (std::size_t t = 0; t < served.size(); ++t) {
    double overflow = std::max(0.0, served.total[t] - capacity);
    f.total_cost += overflow * finance.base_cost_per_slot_hour * finance.adhoc_premium;
    f.peak_overflow = std::max(f.peak_overflow, overflow);
    f.total_containers += served.total[t];
    f.revenue += served.total[t] * prices.Price(HourOfDay(served.hours[t]));
  }
  if (!(f.total_containers > 0)) throw RuntimeError("scenario serves zero containers");
  f.cost_per_container = f.total_cost / f.total_containers;
  return f;
}

ScenarioDetail EvaluateScenarioDetailed(const DemandSeries& demand, const ScenarioKnobs& knobs,
                                        const ScenarioInputs& inputs) {
  knobs.window.Validate();
  if (!(inputs.capacity >= 0)) throw ValidationError("capacity must be >= 0");
  PriceSchedule prices{inputs.finance.base_token_price, knobs.window, knobs.discount};
  prices.Validate();
  inputs.params.Validate();

  DemandSeries over = ApplyOversubscription(demand, knobs.oversub_ratio);
  double tokens = PerfTokenAvailability(over, inputs.capacity, knobs.window, knobs.sla);
  ScenarioDetail out;
  if (knobs.discount > 0) {
    out.shift = ConstrainedShift(over, inputs.flexible_share, inputs.params, prices, tokens,
                                 inputs.mode);
  } else {
    CheckWholeDays(over);
    out.shift.original = over;
    out.shift.shifted = over;
    out.shift.flexible_share = inputs.flexible_share;
  }
  FinanceOutcome f = EvaluateFinance(out.shift.shifted, inputs.capacity, inputs.finance, prices);
  auto& s = out.scenario;
  s.discount = knobs.discount;
  s.oversub_ratio = knobs.oversub_ratio;
  s.window = knobs.window;
  s.window_hours = knobs.window.Length();
  s.sla = knobs.sla;
  s.tokens_available = tokens;
  s.total_cost = f.total_cost;
  s.total_containers = f.total_containers;
  s.cost_per_container = f.cost_per_container;
  s.peak_overflow = f.peak_overflow;
  s.revenue = f.revenue;
  return out;
}

PricingScenario EvaluateScenario(const DemandSeries& demand, const ScenarioKnobs& knobs,
                                 const ScenarioInputs& inputs) {
  return EvaluateScenarioDetailed(demand, knobs, inputs).scenario;
}

std::size_t ScenarioGrid::size() const {
  return discounts.size() * oversub_ratios.size() * window_hours.size() * slas.size();
}

ScenarioGrid ScenarioGrid::Default() {
  ScenarioGrid g;
  for (int i = 1; i <= 10; ++i) g.discounts.push_back(i / 20.0);
  for (int i = 0; i <= 7; ++i) g.oversub_ratios.push_back(i / 20.0);
  g.window_hours = {4, 6, 8, 12};
  g.slas = {0.50, 0.75, 0.90, 0.95, 0.99};
  g.window_start = 16;
  return g;
}

namespace {
bool BetterScenario(const PricingScenario& a, const PricingScenario& b) {
  if (a.cost_per_container != b.cost_per_container)
    return a.cost_per_container < b.cost_per_container;
  if (a.oversub_ratio != b.oversub_ratio) return a.oversub_ratio < b.oversub_ratio;
  return a.discount < b.discount;
}
}  // namespace

ScenarioTable EnumerateScenarios(const DemandSeries& demand, const ScenarioGrid& grid,
                                 const ScenarioInputs& inputs) {
  if (grid.size() == 0) throw ValidationError("scenario grid is empty");
  if (grid.window_start < 0 || grid.window_start > 23)
    throw ValidationError("window_start must lie in 0..23");
  std::vector<ScenarioKnobs> knobs;
  knobs.reserve(grid.size());
  for (double discount : grid.discounts)
    for (double ratio : grid.oversub_ratios)
      for (int hours : grid.window_hours) {
        if (hours < 1 || hours > 23) throw ValidationError("window duration must lie in 1..23");
        int end = grid.window_start + hours;
        Window w{grid.window_start, end > kHoursPerDay ? end - kHoursPerDay : end};
        for (double sla : grid.slas) knobs.push_back({discount, ratio, w, sla});
      }

  ScenarioTable table;
  table.rows.resize(knobs.size());
  ParallelFor(knobs.size(), [&](std::size_t i) {
    table.rows[i] = EvaluateScenario(demand, knobs[i], inputs);
  });
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (BetterScenario(table.rows[i], table.rows[table.best_index])) table.best_index = i;
  table.best = table.rows[table.best_index];
  return table;
}

void SaveScenarioCsv(const std::vector<PricingScenario>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << kScenarioHeader << '\n';
  for (const auto& r : rows)
    out << FormatDouble(r.discount) << ',' << FormatDouble(r.oversub_ratio) << ','
        << r.window.start << ',' << r.window.end << ',' << FormatDouble(r.sla) << ','
        << FormatDouble(r.tokens_available) << ',' << FormatDouble(r.total_containers) << ','
        << FormatDouble(r.peak_overflow) << ',' << FormatDouble(r.total_cost) << ','
        << FormatDouble(r.cost_per_container) << '\n';
  if (!out) throw RuntimeError("write failed: " + path.string());
}

void SaveShiftedDemandCsv(const ShiftResult& shift, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << telemetry::kDemandHeader << ",series\n";
  for (const auto* s : {&shift.original, &shift.shifted}) {
    const char* label = s == &shift.original ? "original" : "shifted";
    for (std::size_t t = 0; t < s->size(); ++t)
      out << telemetry::FormatHour(s->hours[t]) << ',' << FormatDouble(s->high_priority[t]) << ','
          << FormatDouble(s->total[t]) << ',' << label << '\n';
  }
  if (!out) throw RuntimeError("write failed: " + path.string());
}

}  // namespace kea::pricing
