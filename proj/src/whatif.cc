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

#include "kea/whatif.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "kea/common.h"

namespace kea::whatif {

namespace {

constexpr double kMadToSigma = 0.6745;

struct Coefs {
  double intercept;
  double slope;
};

// Weighted least squares for a single regressor, in centered form.
Coefs WeightedLine(std::span<const double> xs, std::span<const double> ys,
                   std::span<const double> w, double min_sxx) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += w[i];
    sx += w[i] * xs[i];
    sy += w[i] * ys[i];
  }
  if (!(sw > 0)) throw RuntimeError("all regression weights vanished");
  double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - xbar;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (ys[i] - ybar);
  }
  if (!(sxx > min_sxx)) throw RuntimeError("degenerate regressor: zero weighted variance");
  double slope = sxy / sxx;
  return {ybar - slope * xbar, slope};
}

double MedianAbsResidual(std::span<const double> xs, std::span<const double> ys, Coefs c) {
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    r[i] = std::abs(ys[i] - (c.intercept + c.slope * xs[i]));
  return Median(std::move(r));
}

}  // namespace

HuberFit FitHuberDetailed(std::span<const double> xs, std::span<const double> ys,
                          const HuberOptions& options) {
  if (xs.size() != ys.size()) throw ValidationError("xs and ys differ in length");
  if (xs.size() < 2) throw ValidationError("need at least two samples to fit a line");
  RequireFinite(xs, "regressor");
  RequireFinite(ys, "response");
  if (options.delta && !(*options.delta > 0))
    throw ValidationError("Huber delta must be positive");
  if (!(options.tuning > 0)) throw ValidationError("Huber tuning constant must be positive");
  if (options.max_iters < 1) throw ValidationError("max_iters must be >= 1");

  const std::size_t n = xs.size();
  auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  if (*xmin == *xmax) throw ValidationError("degenerate regressor: all x identical");
  double xmean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  double raw_sxx = 0;
  for (double x : xs) raw_sxx += (x - xmean) * (x - xmean);
  const double min_sxx = 1e-14 * raw_sxx;

  double ymax = 0;
  for (double y : ys) ymax = std::max(ymax, std::abs(y));
  const double delta_floor = 1e-12 * (1.0 + ymax);

  std::vector<double> w(n, 1.0);
  Coefs c = WeightedLine(xs, ys, w, min_sxx);
  HuberFit fit;
  for (int it = 1; it <= options.max_iters; ++it) {
    fit.iterations = it;
    double delta = options.delta
                       ? *options.delta
                       : options.tuning * MedianAbsResidual(xs, ys, c) / kMadToSigma;
    delta = std::max(delta, delta_floor);
    for (std::size_t i = 0; i < n; ++i) {
      double r = std::abs(ys[i] - (c.intercept + c.slope * xs[i]));
      w[i] = r <= delta ? 1.0 : delta / r;
    }
    Coefs next = WeightedLine(xs, ys, w, min_sxx);
    double change =
        std::max(std::abs(next.intercept - c.intercept), std::abs(next.slope - c.slope));
    c = next;
    // Relative to the coefficient size, so rescaling y does not change where
    // the iteration stops.
    double size = std::max(std::abs(c.intercept), std::abs(c.slope));
    if (change <= options.tol * size) {
      fit.converged = true;
      break;
    }
  }
  fit.model.intercept = c.intercept;
  fit.model.slope = c.slope;
  fit.model.residual_scale = MedianAbsResidual(xs, ys, c) / kMadToSigma;
  fit.model.n_samples = static_cast<int>(n);
  return fit;
}

LinearModel FitHuber(std::span<const double> xs, std::span<const double> ys,
                     const HuberOptions& options) {
  return FitHuberDetailed(xs, ys, options).model;
}

double Predict(const LinearModel& model, double x) {
  if (!std::isfinite(x)) throw ValidationError("predict: non-finite input");
  return model.intercept + model.slope * x;
}

namespace {

std::vector<telemetry::MachineObservation> GroupRows(const telemetry::TelemetryDataset& ds,
                                                     const std::string& group_id,
                                                     const FitOptions& options) {
  if (!ds.FindGroup(group_id)) throw ValidationError("unknown group '" + group_id + "'");
  std::vector<telemetry::MachineObservation> rows;
  for (const auto& o : ds.observations)
    if (o.group_id == group_id) rows.push_back(o);

  if (options.daily_aggregation) {
    struct Acc {
      telemetry::MachineObservation sum;
      int count = 0;
    };
    std::map<std::pair<std::string, int64_t>, Acc> days;
    for (const auto& o : rows) {
      int64_t day = o.timestamp_hour >= 0 ? o.timestamp_hour / 24 : (o.timestamp_hour - 23) / 24;
      auto& a = days[{o.machine_id, day}];
      if (a.count == 0) {
        a.sum = o;
        a.sum.timestamp_hour = day * 24;
      } else {
        a.sum.cpu_util_pct += o.cpu_util_pct;
        a.sum.running_containers += o.running_containers;
        a.sum.total_data_read_bytes += o.total_data_read_bytes;
        a.sum.tasks_finished += o.tasks_finished;
        a.sum.avg_task_latency_s += o.avg_task_latency_s;
        a.sum.cores_used += o.cores_used;
        a.sum.ssd_used_gb += o.ssd_used_gb;
        a.sum.ram_used_gb += o.ram_used_gb;
      }
      ++a.count;
    }
    rows.clear();
    for (auto& [key, a] : days) {
      double k = a.count;
      auto m = a.sum;
      for (double* v : {&m.cpu_util_pct, &m.running_containers, &m.total_data_read_bytes,
                        &m.tasks_finished, &m.avg_task_latency_s, &m.cores_used,
                        &m.ssd_used_gb, &m.ram_used_gb})
        *v /= k;
      rows.push_back(m);
    }
  }
  if (rows.size() < options.min_samples)
    throw ValidationError("group '" + group_id + "' has " + std::to_string(rows.size()) +
                          " samples, need " + std::to_string(options.min_samples));
  return rows;
}

template <typename F>
std::vector<double> Column(const std::vector<telemetry::MachineObservation>& rows, F field) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& o : rows) out.push_back(field(o));
  return out;
}

LinearModel FitOrExplain(std::span<const double> xs, std::span<const double> ys,
                         const HuberOptions& opts, const std::string& what) {
  try {
    return FitHuber(xs, ys, opts);
  } catch (const ValidationError& e) {
    throw ValidationError(what + ": " + e.what());
  } catch (const RuntimeError& e) {
    throw RuntimeError(what + ": " + e.what());
  }
}

}  // namespace

GroupModelSet FitModelSet(const telemetry::TelemetryDataset& dataset,
                          const std::string& group_id, const FitOptions& options) {
  auto rows = GroupRows(dataset, group_id, options);
  auto containers = Column(rows, [](const auto& o) { return o.running_containers; });
  auto cpu = Column(rows, [](const auto& o) { return o.cpu_util_pct; });
  auto tasks = Column(rows, [](const auto& o) { return o.tasks_finished; });
  auto latency = Column(rows, [](const auto& o) { return o.avg_task_latency_s; });

  GroupModelSet s;
  s.group_id = group_id;
  s.g = FitOrExplain(containers, cpu, options.huber, group_id + " containers->cpu");
  s.h = FitOrExplain(cpu, tasks, options.huber, group_id + " cpu->tasks");
  s.f = FitOrExplain(cpu, latency, options.huber, group_id + " cpu->latency");
  if (options.m_current_percentile) {
    double q = *options.m_current_percentile;
    if (!(q > 0 && q < 1)) throw ValidationError("m_current percentile must lie in (0, 1)");
    s.m_current = LowerQuantile(containers, q);
  } else if (options.m_current_stat == CenterStat::kMean) {
    s.m_current = std::accumulate(containers.begin(), containers.end(), 0.0) /
                  static_cast<double>(containers.size());
  } else {
    s.m_current = Median(containers);
  }
  return s;
}

ResourceModels FitResourceModels(const telemetry::TelemetryDataset& dataset,
                                 const std::string& group_id, const FitOptions& options) {
  auto rows = GroupRows(dataset, group_id, options);
  auto cores = Column(rows, [](const auto& o) { return o.cores_used; });
  auto ssd = Column(rows, [](const auto& o) { return o.ssd_used_gb; });
  auto ram = Column(rows, [](const auto& o) { return o.ram_used_gb; });
  if (std::all_of(cores.begin(), cores.end(), [](double c) { return c == 0.0; }))
    throw ValidationError("group '" + group_id + "': cores_used is zero everywhere");

  ResourceModels r;
  r.group_id = group_id;
  r.p = FitOrExplain(cores, ssd, options.huber, group_id + " cores->ssd");
  r.q = FitOrExplain(cores, ram, options.huber, group_id + " cores->ram");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(cores[i] > 0)) continue;
    r.beta_samples.emplace_back((ssd[i] - r.p.intercept) / cores[i],
                                (ram[i] - r.q.intercept) / cores[i]);
  }
  return r;
}

nlohmann::ordered_json ToJson(const LinearModel& m) {
  return {{"intercept", m.intercept},
          {"slope", m.slope},
          {"residual_scale", m.residual_scale},
          {"n", m.n_samples}};
}

nlohmann::ordered_json ToJson(const GroupModelSet& s) {
  return {{"group_id", s.group_id},
          {"g", ToJson(s.g)},
          {"h", ToJson(s.h)},
          {"f", ToJson(s.f)},
          {"m_current", s.m_current}};
}

nlohmann::ordered_json ToJson(const ResourceModels& r) {
  nlohmann::ordered_json betas = nlohmann::ordered_json::array();
  for (const auto& [bs, br] : r.beta_samples) betas.push_back({bs, br});
  return {{"group_id", r.group_id}, {"p", ToJson(r.p)}, {"q", ToJson(r.q)},
          {"beta_samples", std::move(betas)}};
}

LinearModel LinearModelFromJson(const nlohmann::json& j) {
  LinearModel m;
  m.intercept = j.at("intercept").get<double>();
  m.slope = j.at("slope").get<double>();
  m.residual_scale = j.at("residual_scale").get<double>();
  m.n_samples = j.at("n").get<int>();
  if (!std::isfinite(m.intercept) || !std::isfinite(m.slope) || !(m.residual_scale >= 0))
    throw ValidationError("linear model has invalid coefficients");
  return m;
}

GroupModelSet GroupModelSetFromJson(const nlohmann::json& j) {
  try {
    GroupModelSet s;
    s.group_id = j.at("group_id").get<std::string>();
    s.g = LinearModelFromJson(j.at("g"));
    s.h = LinearModelFromJson(j.at("h"));
    s.f = LinearModelFromJson(j.at("f"));
    s.m_current = j.at("m_current").get<double>();
    if (!(s.m_current >= 0)) throw ValidationError("m_current must be >= 0");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model set JSON: ") + e.what());
  }
}

ResourceModels ResourceModelsFromJson(const nlohmann::json& j) {
  try {
    ResourceModels r;
    r.group_id = j.at("group_id").get<std::string>();
    r.p = LinearModelFromJson(j.at("p"));
    r.q = LinearModelFromJson(j.at("q"));
    for (const auto& b : j.at("beta_samples"))
      r.beta_samples.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("resource model JSON: ") + e.what());
  }
}

}  // namespace kea::whatif
