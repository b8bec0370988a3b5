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

// Flighting analytics: experiment/control assignment on production machines
// and two-sample significance tests for the measured effect.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace kea::flighting {

struct Machine {
  std::string machine_id;
  std::string rack_id;
};

/// Alternate machines within each rack (needs rack info).
struct IdealDesign {};

/// One roster, alternating treatment by time slice.
struct TimeSlicingDesign {
  int slice_hours = 5;
};

/// Explicit rosters, e.g. whole chassis per group.
struct HybridDesign {
  std::map<std::string, std::string> roster;  // machine_id -> label
};

using ExperimentDesign = std::variant<IdealDesign, TimeSlicingDesign, HybridDesign>;

struct Assignment {
  std::map<std::string, std::string> labels;  // machine_id -> group label
  std::vector<std::string> excluded;          // machines in single-machine racks
};

inline constexpr const char* kTimeSlicedLabel = "sliced";

Assignment AssignGroups(const ExperimentDesign& design, const std::vector<Machine>& machines);

/// "A" or "B" for the slice containing `hour` (hours since epoch).
std::string TimeSliceLabel(int64_t hour, int slice_hours);

enum class Variance { kPooled, kWelch };

struct TTestResult {
  double mean_a = 0;
  double mean_b = 0;
  double pct_change = 0;  // (b - a) / a * 100
  double t_value = 0;
  double dof = 0;
  bool significant_at_95 = false;
};

/// t = (mean_b - mean_a) / se; two-sided 95% significance.
TTestResult StudentT(const std::vector<double>& sample_a, const std::vector<double>& sample_b,
                     Variance variance = Variance::kPooled);

/// Two-sided 95% critical value of Student's t with `dof` degrees of freedom.
double CriticalT95(double dof);

struct EffectRow {
  std::string name;
  TTestResult test;
};

EffectRow TreatmentEffect(const std::vector<double>& before, const std::vector<double>& after,
                          const std::string& metric_name, Variance variance = Variance::kPooled);

/// Columns: Name, Group A, Group B, % Changes, t-value.
std::string EffectTable(const std::vector<EffectRow>& rows, const std::string& label_a = "Group A",
                        const std::string& label_b = "Group B");

/// One measurement window for a machine or chassis under a capping setting.
struct CappingSample {
  double total_data_read = 0;
  double cpu_time = 0;
  double execution_time = 0;
};

enum class CappingMetric { kBytesPerCpuTime, kBytesPerSecond };

struct CappingRow {
  std::string group;
  CappingMetric metric;
  double baseline_value = 0;  // sum read / sum time, baseline group
  double group_value = 0;
  double pct_vs_baseline = 0;
  TTestResult test;  // on per-sample ratios
};

std::vector<CappingRow> CappingReport(const std::map<std::string, std::vector<CappingSample>>& groups,
                                      const std::string& baseline_label,
                                      const std::vector<CappingMetric>& metrics = {
                                          CappingMetric::kBytesPerCpuTime,
                                          CappingMetric::kBytesPerSecond});

std::string CappingMarkdown(const std::vector<CappingRow>& rows, const std::string& baseline_label);

const char* MetricName(CappingMetric m);

}  // namespace kea::flighting
