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

// What-if models: robust univariate affine fits describing how a machine
// group responds to load (containers -> CPU -> throughput / latency) and how
// SSD and RAM usage scale with cores.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kea/telemetry.h"

namespace kea::whatif {

struct LinearModel {
  double intercept = 0.0;
  double slope = 0.0;
  double residual_scale = 0.0;  // median |residual| / 0.6745
  int n_samples = 0;

  bool operator==(const LinearModel&) const = default;
};

struct HuberOptions {
  // Absolute Huber threshold. When empty the threshold is re-estimated every
  // iteration as tuning * residual_scale.
  std::optional<double> delta;
  double tuning = 1.35;
  int max_iters = 100;
  double tol = 1e-8;  // max coefficient change, relative to the larger coefficient
};

struct HuberFit {
  LinearModel model;
  int iterations = 0;
  bool converged = false;
};

/// Huber M-estimate of y = intercept + slope * x via IRLS, started from OLS.
HuberFit FitHuberDetailed(std::span<const double> xs, std::span<const double> ys,
                          const HuberOptions& options = {});
LinearModel FitHuber(std::span<const double> xs, std::span<const double> ys,
                     const HuberOptions& options = {});

/// intercept + slope * x, unclamped.
double Predict(const LinearModel& model, double x);

enum class CenterStat { kMedian, kMean };

struct FitOptions {
  HuberOptions huber;
  std::size_t min_samples = 30;
  CenterStat m_current_stat = CenterStat::kMedian;
  // When set, m_current is this quantile (lower interpolation) of running
  // containers instead of the median/mean.
  std::optional<double> m_current_percentile;
  // Fit on per-(machine, day) means instead of hourly rows.
  bool daily_aggregation = false;
};

/// The g/h/f chain for one machine group.
struct GroupModelSet {
  std::string group_id;
  LinearModel g;  // running containers -> CPU %
  LinearModel h;  // CPU % -> tasks finished per hour
  LinearModel f;  // CPU % -> average task latency (s)
  double m_current = 0.0;

  bool operator==(const GroupModelSet&) const = default;
};

struct ResourceModels {
  std::string group_id;
  LinearModel p;  // cores -> SSD GB
  LinearModel q;  // cores -> RAM GB
  std::vector<std::pair<double, double>> beta_samples;  // (ssd/core, ram/core)

  bool operator==(const ResourceModels&) const = default;
};

GroupModelSet FitModelSet(const telemetry::TelemetryDataset& dataset,
                          const std::string& group_id, const FitOptions& options = {});

ResourceModels FitResourceModels(const telemetry::TelemetryDataset& dataset,
                                 const std::string& group_id, const FitOptions& options = {});

nlohmann::ordered_json ToJson(const LinearModel& m);
nlohmann::ordered_json ToJson(const GroupModelSet& s);
nlohmann::ordered_json ToJson(const ResourceModels& r);
LinearModel LinearModelFromJson(const nlohmann::json& j);
GroupModelSet GroupModelSetFromJson(const nlohmann::json& j);
ResourceModels ResourceModelsFromJson(const nlohmann::json& j);

}  // namespace kea::whatif
