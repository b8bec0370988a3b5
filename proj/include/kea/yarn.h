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

// Max-running-containers tuning: choose an integer container limit per
// machine group that maximizes cluster-wide running containers without
// raising the task-weighted average latency above today's level.

#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kea/whatif.h"

namespace kea::yarn {

struct GroupOutcome {
  int m = 0;
  double x = 0;  // CPU %
  double l = 0;  // tasks / hour
  double w = 0;  // latency s

  bool operator==(const GroupOutcome&) const = default;
};

struct ClusterOutcome {
  std::map<std::string, GroupOutcome> per_group;
  double total_containers = 0;  // sum m_k * n_k
  double avg_latency = 0;       // sum w*l*n / sum l*n

  bool operator==(const ClusterOutcome&) const = default;
};

struct YarnPlan {
  ClusterOutcome baseline;
  ClusterOutcome proposed;
  std::map<std::string, int> deltas;
  long long feasible_count = 0;
  long long candidate_count = 0;
  int delta_max = 0;
};

using Counts = std::map<std::string, int>;

/// Predicts per-group and cluster outcomes for integer limits m.
ClusterOutcome EvaluateConfig(const std::vector<whatif::GroupModelSet>& models,
                              const Counts& counts, const std::map<std::string, int>& m);

inline constexpr double kMaxCandidates = 1e7;

/// Exhaustive search over m_k in round(m'_k) +- delta_max (and >= m_floor).
/// Keeps W <= W', maximizes sum m_k n_k; ties go to lower W then to the
/// lexicographically smallest m (groups ordered by id).
YarnPlan OptimizeMaxContainers(const std::vector<whatif::GroupModelSet>& models,
                               const Counts& counts, int delta_max, int m_floor = 1);

/// Cyclic coordinate search over the same box for instances too large to
/// enumerate. Local optimum only; same feasibility rule and ordering.
YarnPlan CoordinateSearch(const std::vector<whatif::GroupModelSet>& models,
                          const Counts& counts, int delta_max, int m_floor = 1,
                          int max_sweeps = 100);

/// True when every group moves in the same direction (or stays) in both plans.
bool SameDirection(const YarnPlan& a, const YarnPlan& b);

nlohmann::ordered_json ToJson(const YarnPlan& plan);
/// Table: group, m', m*, delta, predicted x/l/w.
std::string ToMarkdown(const YarnPlan& plan);

}  // namespace kea::yarn
