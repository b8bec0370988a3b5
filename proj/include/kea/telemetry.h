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

// Machine-group telemetry: the data model every tuning pipeline consumes,
// CSV ingestion/emission, demand aggregation and a seeded synthetic cluster
// generator for running the pipelines without production data.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace kea::telemetry {

/// Hours since 1970-01-01T00:00Z.
using UtcHour = int64_t;

inline int HourOfDay(UtcHour h) { return static_cast<int>(((h % 24) + 24) % 24); }

/// "YYYY-MM-DDTHH:00:00Z"
std::string FormatHour(UtcHour h);
/// Accepts exactly the format produced by FormatHour.
UtcHour ParseHour(std::string_view text);

/// One SC-SKU combination (software configuration x hardware generation).
struct MachineGroup {
  std::string group_id;
  int machine_count = 0;
  std::map<std::string, std::string> rack_of;  // machine_id -> rack_id

  bool operator==(const MachineGroup&) const = default;
};

/// One machine-hour of telemetry.
struct MachineObservation {
  UtcHour timestamp_hour = 0;
  std::string machine_id;
  std::string group_id;
  double cpu_util_pct = 0;
  double running_containers = 0;  // hourly time-average
  double total_data_read_bytes = 0;
  double tasks_finished = 0;
  double avg_task_latency_s = 0;
  double cores_used = 0;
  double ssd_used_gb = 0;
  double ram_used_gb = 0;

  bool operator==(const MachineObservation&) const = default;
};

struct TelemetryDataset {
  std::vector<MachineObservation> observations;  // sorted (hour, machine_id)
  std::vector<MachineGroup> groups;
  double capacity_containers = 1.0;
  // Fraction of each hour's demand that is high priority. The CSV schema has
  // no priority column, so this travels in the sidecar metadata.
  double high_priority_share = 0.6;

  const MachineGroup* FindGroup(const std::string& group_id) const;
  /// Throws ValidationError on any broken invariant.
  void Validate() const;

  bool operator==(const TelemetryDataset&) const = default;
};

struct DemandSeries {
  std::vector<UtcHour> hours;  // strictly increasing
  std::vector<double> high_priority;
  std::vector<double> total;

  std::size_t size() const { return hours.size(); }
  void Validate() const;
  bool operator==(const DemandSeries&) const = default;
};

struct PercentileProfile {
  std::vector<double> levels;               // each in (0, 1), ascending
  std::vector<std::vector<double>> values;  // [level][hour_of_day], 24 wide
};

// -- Synthetic generation ----------------------------------------------------

struct SyntheticGroupSpec {
  std::string group_id;
  int machine_count = 10;
  int machines_per_rack = 20;
  double base_containers = 8.0;  // diurnal mean of running containers
  // containers -> CPU %
  double cpu_intercept = 0.0;
  double cpu_per_container = 10.0;
  // CPU % -> tasks finished per hour
  double tasks_intercept = 0.0;
  double tasks_per_cpu = 1.0;
  // CPU % -> average task latency (s)
  double latency_intercept = 1.0;
  double latency_per_cpu = 0.01;
  // running containers -> cores used
  double cores_per_container = 1.0;
  // cores -> SSD GB / RAM GB
  double ssd_intercept = 50.0;
  double ssd_per_core = 25.0;
  double ram_intercept = 8.0;
  double ram_per_core = 4.0;
  double bytes_per_task = 2.0e9;
};

struct NoiseScales {
  double containers = 0.0;  // additive Gaussian sd on running containers
  double cpu = 0.0;
  double tasks = 0.0;
  double latency = 0.0;
  double ssd = 0.0;
  double ram = 0.0;
};

struct SyntheticSpec {
  std::vector<SyntheticGroupSpec> groups;
  NoiseScales noise;
  double diurnal_amplitude = 0.3;  // relative swing around base_containers
  int peak_hour = 4;               // UTC hour of the diurnal maximum
  int days = 7;
  double capacity_containers = 0.0;  // <= 0: 1.1 x expected peak demand
  double high_priority_share = 0.6;
  UtcHour start_hour = 473352;  // 2024-01-01T00:00Z
};

/// Deterministic in (spec, seed), independent of worker count.
TelemetryDataset GenerateSyntheticCluster(const SyntheticSpec& spec, uint64_t seed);

// -- I/O ----------------------------------------------------------------------

inline constexpr std::string_view kTelemetryHeader =
    "timestamp_hour,machine_id,group_id,cpu_util_pct,running_containers,"
    "total_data_read_bytes,tasks_finished,avg_task_latency_s,cores_used,"
    "ssd_used_gb,ram_used_gb";
inline constexpr std::string_view kDemandHeader =
    "timestamp_hour,high_priority_containers,total_containers";

/// Sidecar metadata path for a telemetry CSV (groups, racks, capacity).
std::filesystem::path MetadataPath(const std::filesystem::path& csv_path);

/// Writes the CSV and its sidecar metadata.
void SaveTelemetry(const TelemetryDataset& dataset, const std::filesystem::path& path);

struct LoadOptions {
  // Used only when no sidecar metadata exists.
  double capacity_containers = 0.0;  // <= 0: peak hourly total
  double high_priority_share = 0.6;
};

/// Parses, sorts and validates. Without a sidecar, groups are derived from
/// the rows (machine_count = distinct machines, no rack info).
TelemetryDataset LoadTelemetry(const std::filesystem::path& path,
                               const LoadOptions& options = {});

void SaveDemand(const DemandSeries& demand, const std::filesystem::path& path);
DemandSeries LoadDemand(const std::filesystem::path& path);

// -- Aggregation ----------------------------------------------------------------

/// total[t] = sum of running containers over machines at hour t.
DemandSeries HourlyDemandProfile(const TelemetryDataset& dataset);

/// Per hour-of-day lower-interpolation quantiles of total demand over days.
PercentileProfile ComputePercentileProfile(const DemandSeries& demand,
                                           const std::vector<double>& levels);

}  // namespace kea::telemetry
