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

#include "kea/telemetry.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kea/common.h"

namespace kea::telemetry {

namespace {

constexpr int kTelemetryColumns = 11;

std::string TwoDigits(unsigned v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

std::string Padded(int v, int width) {
  std::string s = std::to_string(v);
  return std::string(s.size() < static_cast<std::size_t>(width) ? width - s.size() : 0, '0') + s;
}

bool ObservationLess(const MachineObservation& a, const MachineObservation& b) {
  if (a.timestamp_hour != b.timestamp_hour) return a.timestamp_hour < b.timestamp_hour;
  return a.machine_id < b.machine_id;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  return out;
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ValidationError("missing file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  return in;
}

}  // namespace

std::string FormatHour(UtcHour h) {
  using namespace std::chrono;
  int64_t days = h >= 0 ? h / 24 : (h - 23) / 24;
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  return std::to_string(static_cast<int>(ymd.year())) + "-" +
         TwoDigits(static_cast<unsigned>(ymd.month())) + "-" +
         TwoDigits(static_cast<unsigned>(ymd.day())) + "T" +
         TwoDigits(static_cast<unsigned>(HourOfDay(h))) + ":00:00Z";
}

UtcHour ParseHour(std::string_view text) {
  // YYYY-MM-DDTHH:00:00Z
  auto bad = [&] {
    return ValidationError("timestamp_hour must look like YYYY-MM-DDTHH:00:00Z, got '" +
                           std::string(text) + "'");
  };
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text.substr(13) != ":00:00Z")
    throw bad();
  int64_t y, mo, d, hh;
  try {
    y = ParseInt(text.substr(0, 4), "year");
    mo = ParseInt(text.substr(5, 2), "month");
    d = ParseInt(text.substr(8, 2), "day");
    hh = ParseInt(text.substr(11, 2), "hour");
  } catch (const ValidationError&) {
    throw bad();
  }
  using namespace std::chrono;
  year_month_day ymd{year{static_cast<int>(y)}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh < 0 || hh > 23) throw bad();
  return static_cast<int64_t>(sys_days{ymd}.time_since_epoch().count()) * 24 + hh;
}

const MachineGroup* TelemetryDataset::FindGroup(const std::string& group_id) const {
  for (const auto& g : groups)
    if (g.group_id == group_id) return &g;
  return nullptr;
}

void TelemetryDataset::Validate() const {
  if (!(capacity_containers > 0) || !std::isfinite(capacity_containers))
    throw ValidationError("capacity_containers must be positive");
  if (!(high_priority_share >= 0 && high_priority_share <= 1))
    throw ValidationError("high_priority_share must be within [0, 1]");
  std::set<std::string> group_ids;
  std::map<std::string, std::string> machine_group;
  for (const auto& g : groups) {
    if (g.group_id.empty()) throw ValidationError("group_id must be non-empty");
    if (g.machine_count < 1)
      throw ValidationError("group " + g.group_id + ": machine_count must be >= 1");
    if (!group_ids.insert(g.group_id).second)
      throw ValidationError("duplicate group " + g.group_id);
    for (const auto& [machine, rack] : g.rack_of) {
      if (!machine_group.emplace(machine, g.group_id).second)
        throw ValidationError("machine " + machine + " appears in two groups");
    }
  }
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    if (!group_ids.count(o.group_id))
      throw ValidationError("unknown group_id '" + o.group_id + "'");
    auto [it, inserted] = machine_group.emplace(o.machine_id, o.group_id);
    if (!inserted && it->second != o.group_id)
      throw ValidationError("machine " + o.machine_id + " appears in two groups");
    if (i > 0 && !ObservationLess(observations[i - 1], o))
      throw ValidationError("observations not sorted or duplicate (machine_id, hour) for " +
                            o.machine_id);
    if (!(o.cpu_util_pct >= 0 && o.cpu_util_pct <= 100))
      throw ValidationError("cpu_util_pct outside [0, 100] for " + o.machine_id);
    for (double v : {o.running_containers, o.total_data_read_bytes, o.tasks_finished,
                     o.avg_task_latency_s, o.cores_used, o.ssd_used_gb, o.ram_used_gb})
      if (!(v >= 0) || !std::isfinite(v))
        throw ValidationError("negative or non-finite resource field for " + o.machine_id);
  }
}

void DemandSeries::Validate() const {
  if (high_priority.size() != hours.size() || total.size() != hours.size())
    throw ValidationError("demand series columns have unequal lengths");
  for (std::size_t t = 0; t < hours.size(); ++t) {
    if (t > 0 && hours[t] <= hours[t - 1])
      throw ValidationError("demand hours must be strictly increasing");
    if (!(high_priority[t] >= 0) || !(total[t] >= 0) || !std::isfinite(total[t]))
      throw ValidationError("demand must be finite and non-negative");
    if (high_priority[t] > total[t])
      throw ValidationError("high-priority demand exceeds total at " + FormatHour(hours[t]));
  }
}

// -- Generation ---------------------------------------------------------------

TelemetryDataset GenerateSyntheticCluster(const SyntheticSpec& spec, uint64_t seed) {
  if (spec.days < 0) throw ValidationError("days must be >= 0");
  if (spec.diurnal_amplitude < 0) throw ValidationError("diurnal amplitude must be >= 0");
  if (spec.peak_hour < 0 || spec.peak_hour > 23)
    throw ValidationError("peak_hour must be within 0..23");
  const auto& n = spec.noise;
  for (double s : {n.containers, n.cpu, n.tasks, n.latency, n.ssd, n.ram})
    if (!(s >= 0)) throw ValidationError("noise scales must be >= 0");
  if (!(spec.high_priority_share >= 0 && spec.high_priority_share <= 1))
    throw ValidationError("high_priority_share must be within [0, 1]");

  TelemetryDataset ds;
  ds.high_priority_share = spec.high_priority_share;

  struct Machine {
    std::string id;
    const SyntheticGroupSpec* group;
  };
  std::vector<Machine> machines;
  int total_machines = 0;
  double peak_demand = 0;
  for (const auto& g : spec.groups) {
    if (g.machine_count < 1)
      throw ValidationError("group " + g.group_id + " has zero machines");
    if (g.machines_per_rack < 1) throw ValidationError("machines_per_rack must be >= 1");
    MachineGroup group{g.group_id, g.machine_count, {}};
    for (int j = 0; j < g.machine_count; ++j) {
      std::string id = g.group_id + "-m" + Padded(j, 5);
      group.rack_of[id] = g.group_id + "-r" + Padded(j / g.machines_per_rack, 3);
      machines.push_back({id, &g});
    }
    ds.groups.push_back(std::move(group));
    total_machines += g.machine_count;
    peak_demand += g.machine_count * g.base_containers * (1 + spec.diurnal_amplitude);
  }
  if (total_machines == 0) throw ValidationError("synthetic cluster needs at least one machine");
  ds.capacity_containers =
      spec.capacity_containers > 0 ? spec.capacity_containers : 1.1 * peak_demand;
  if (!(ds.capacity_containers > 0)) ds.capacity_containers = 1.0;
  ds.Validate();

  std::sort(machines.begin(), machines.end(),
            [](const Machine& a, const Machine& b) { return a.id < b.id; });
  const int hours = spec.days * 24;
  std::vector<std::vector<MachineObservation>> per_machine(machines.size());

  ParallelFor(machines.size(), [&](std::size_t idx) {
    const Machine& m = machines[idx];
    const SyntheticGroupSpec& g = *m.group;
    Rng rng = SubStream(seed, m.id);
    std::normal_distribution<double> z(0.0, 1.0);
    auto& rows = per_machine[idx];
    rows.reserve(hours);
    for (int t = 0; t < hours; ++t) {
      // Fixed draw count per row keeps streams aligned whatever the scales.
      double e_ctr = z(rng), e_cpu = z(rng), e_tasks = z(rng), e_lat = z(rng),
             e_ssd = z(rng), e_ram = z(rng);
      MachineObservation o;
      o.timestamp_hour = spec.start_hour + t;
      o.machine_id = m.id;
      o.group_id = g.group_id;
      double phase = 2.0 * std::numbers::pi *
                     (HourOfDay(o.timestamp_hour) - spec.peak_hour) / 24.0;
      o.running_containers = std::max(
          0.0, g.base_containers * (1.0 + spec.diurnal_amplitude * std::cos(phase)) +
                   n.containers * e_ctr);
      o.cpu_util_pct = std::clamp(
          g.cpu_intercept + g.cpu_per_container * o.running_containers + n.cpu * e_cpu, 0.0,
          100.0);
      o.tasks_finished =
          std::max(0.0, g.tasks_intercept + g.tasks_per_cpu * o.cpu_util_pct + n.tasks * e_tasks);
      o.avg_task_latency_s = std::max(
          0.0, g.latency_intercept + g.latency_per_cpu * o.cpu_util_pct + n.latency * e_lat);
      o.cores_used = g.cores_per_container * o.running_containers;
      o.ssd_used_gb =
          std::max(0.0, g.ssd_intercept + g.ssd_per_core * o.cores_used + n.ssd * e_ssd);
      o.ram_used_gb =
          std::max(0.0, g.ram_intercept + g.ram_per_core * o.cores_used + n.ram * e_ram);
      o.total_data_read_bytes = g.bytes_per_task * o.tasks_finished;
      rows.push_back(std::move(o));
    }
  });

  // Machines are sorted by id and rows by hour, so an hour-major interleave
  // yields (hour, machine_id) order directly.
  ds.observations.reserve(static_cast<std::size_t>(hours) * machines.size());
  for (int t = 0; t < hours; ++t)
    for (auto& rows : per_machine) ds.observations.push_back(std::move(rows[t]));
  return ds;
}

// -- I/O ----------------------------------------------------------------------

std::filesystem::path MetadataPath(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".meta.json");
}

void SaveTelemetry(const TelemetryDataset& dataset, const std::filesystem::path& path) {
  dataset.Validate();
  auto out = OpenForWrite(path);
  out << kTelemetryHeader << '\n';
  for (const auto& o : dataset.observations) {
    out << FormatHour(o.timestamp_hour) << ',' << o.machine_id << ',' << o.group_id << ','
        << FormatDouble(o.cpu_util_pct) << ',' << FormatDouble(o.running_containers) << ','
        << FormatDouble(o.total_data_read_bytes) << ',' << FormatDouble(o.tasks_finished) << ','
        << FormatDouble(o.avg_task_latency_s) << ',' << FormatDouble(o.cores_used) << ','
        << FormatDouble(o.ssd_used_gb) << ',' << FormatDouble(o.ram_used_gb) << '\n';
  }
  if (!out) throw RuntimeError("write failed: " + path.string());

  nlohmann::ordered_json meta;
  meta["capacity_containers"] = dataset.capacity_containers;
  meta["high_priority_share"] = dataset.high_priority_share;
  meta["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : dataset.groups) {
    nlohmann::ordered_json jg;
    jg["group_id"] = g.group_id;
    jg["machine_count"] = g.machine_count;
    jg["rack_of"] = nlohmann::ordered_json::object();
    for (const auto& [machine, rack] : g.rack_of) jg["rack_of"][machine] = rack;
    meta["groups"].push_back(std::move(jg));
  }
  auto meta_out = OpenForWrite(MetadataPath(path));
  meta_out << meta.dump(2) << '\n';
}

TelemetryDataset LoadTelemetry(const std::filesystem::path& path, const LoadOptions& options) {
  auto in = OpenForRead(path);
  TelemetryDataset ds;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTelemetryHeader)
    throw ValidationError(path.string() + ": header does not match the telemetry schema");

  static const char* kColumnNames[kTelemetryColumns] = {
      "timestamp_hour", "machine_id",     "group_id",       "cpu_util_pct",
      "running_containers", "total_data_read_bytes", "tasks_finished",
      "avg_task_latency_s", "cores_used",  "ssd_used_gb",    "ram_used_gb"};

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = SplitCsvLine(line);
    auto where = [&](std::size_t col) {
      return path.filename().string() + " line " + std::to_string(line_no) + ", column " +
             std::to_string(col + 1) + " (" + kColumnNames[col] + ")";
    };
    if (fields.size() != kTelemetryColumns)
      throw ValidationError(path.filename().string() + " line " + std::to_string(line_no) +
                            ": expected 11 columns, got " + std::to_string(fields.size()));
    MachineObservation o;
    std::size_t col = 0;
    try {
      o.timestamp_hour = ParseHour(fields[0]);
      col = 1;
      if (fields[1].empty()) throw ValidationError("empty machine_id");
      o.machine_id = std::string(fields[1]);
      col = 2;
      if (fields[2].empty()) throw ValidationError("empty group_id");
      o.group_id = std::string(fields[2]);
      double* numeric[] = {&o.cpu_util_pct, &o.running_containers, &o.total_data_read_bytes,
                           &o.tasks_finished, &o.avg_task_latency_s, &o.cores_used,
                           &o.ssd_used_gb, &o.ram_used_gb};
      for (col = 3; col < kTelemetryColumns; ++col) {
        double v = ParseDouble(fields[col], kColumnNames[col]);
        if (col == 3 && !(v >= 0 && v <= 100))
          throw ValidationError("cpu_util_pct " + std::string(fields[col]) +
                                " outside [0, 100]");
        if (v < 0) throw ValidationError("negative value " + std::string(fields[col]));
        *numeric[col - 3] = v;
      }
    } catch (const ValidationError& e) {
      throw ValidationError(where(col) + ": " + e.what());
    }
    ds.observations.push_back(std::move(o));
  }

  std::stable_sort(ds.observations.begin(), ds.observations.end(), ObservationLess);
  for (std::size_t i = 1; i < ds.observations.size(); ++i) {
    const auto& a = ds.observations[i - 1];
    const auto& b = ds.observations[i];
    if (a.timestamp_hour == b.timestamp_hour && a.machine_id == b.machine_id)
      throw ValidationError(path.filename().string() + ": duplicate (machine_id, hour) for " +
                            b.machine_id + " at " + FormatHour(b.timestamp_hour));
  }

  auto meta_path = MetadataPath(path);
  if (std::filesystem::exists(meta_path)) {
    nlohmann::json meta;
    try {
      std::ifstream mi(meta_path);
      meta = nlohmann::json::parse(mi);
      ds.capacity_containers = meta.at("capacity_containers").get<double>();
      ds.high_priority_share = meta.at("high_priority_share").get<double>();
      for (const auto& jg : meta.at("groups")) {
        MachineGroup g;
        g.group_id = jg.at("group_id").get<std::string>();
        g.machine_count = jg.at("machine_count").get<int>();
        for (const auto& [machine, rack] : jg.at("rack_of").items())
          g.rack_of[machine] = rack.get<std::string>();
        ds.groups.push_back(std::move(g));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(meta_path.string() + ": " + e.what());
    }
    for (std::size_t i = 0; i < ds.observations.size(); ++i)
      if (!ds.FindGroup(ds.observations[i].group_id))
        throw ValidationError(path.filename().string() + ": unknown group_id '" +
                              ds.observations[i].group_id + "'");
  } else {
    std::map<std::string, std::set<std::string>> machines_by_group;
    for (const auto& o : ds.observations) machines_by_group[o.group_id].insert(o.machine_id);
    for (const auto& [gid, ms] : machines_by_group)
      ds.groups.push_back({gid, static_cast<int>(ms.size()), {}});
    ds.high_priority_share = options.high_priority_share;
    ds.capacity_containers = options.capacity_containers;
    if (!(ds.capacity_containers > 0)) {
      std::map<UtcHour, double> per_hour;
      for (const auto& o : ds.observations) per_hour[o.timestamp_hour] += o.running_containers;
      double peak = 0;
      for (const auto& [h, v] : per_hour) peak = std::max(peak, v);
      ds.capacity_containers = peak > 0 ? peak : 1.0;
    }
  }
  ds.Validate();
  return ds;
}

void SaveDemand(const DemandSeries& demand, const std::filesystem::path& path) {
  demand.Validate();
  auto out = OpenForWrite(path);
  out << kDemandHeader << '\n';
  for (std::size_t t = 0; t < demand.size(); ++t)
    out << FormatHour(demand.hours[t]) << ',' << FormatDouble(demand.high_priority[t]) << ','
        << FormatDouble(demand.total[t]) << '\n';
  if (!out) throw RuntimeError("write failed: " + path.string());
}

DemandSeries LoadDemand(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDemandHeader)
    throw ValidationError(path.string() + ": header does not match the demand schema");
  DemandSeries d;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = SplitCsvLine(line);
    std::string where = path.filename().string() + " line " + std::to_string(line_no);
    if (fields.size() != 3) throw ValidationError(where + ": expected 3 columns");
    std::size_t col = 0;
    try {
      d.hours.push_back(ParseHour(fields[0]));
      col = 1;
      d.high_priority.push_back(ParseDouble(fields[1], "high_priority_containers"));
      col = 2;
      d.total.push_back(ParseDouble(fields[2], "total_containers"));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ", column " + std::to_string(col + 1) + ": " + e.what());
    }
  }
  d.Validate();
  return d;
}

// -- Aggregation ----------------------------------------------------------------

DemandSeries HourlyDemandProfile(const TelemetryDataset& dataset) {
  if (dataset.observations.empty()) throw ValidationError("dataset has no observations");
  DemandSeries d;
  for (const auto& o : dataset.observations) {
    if (d.hours.empty() || d.hours.back() != o.timestamp_hour) {
      d.hours.push_back(o.timestamp_hour);
      d.total.push_back(0.0);
    }
    d.total.back() += o.running_containers;
  }
  d.high_priority.reserve(d.total.size());
  for (double t : d.total) d.high_priority.push_back(dataset.high_priority_share * t);
  return d;
}

PercentileProfile ComputePercentileProfile(const DemandSeries& demand,
                                           const std::vector<double>& levels) {
  demand.Validate();
  if (levels.empty()) throw ValidationError("at least one quantile level required");
  for (double q : levels)
    if (!(q > 0 && q < 1)) throw ValidationError("quantile levels must lie in (0, 1)");
  if (demand.size() < 24) throw ValidationError("percentile profile needs at least one full day");
  std::vector<std::vector<double>> by_hour(24);
  for (std::size_t t = 0; t < demand.size(); ++t)
    by_hour[HourOfDay(demand.hours[t])].push_back(demand.total[t]);
  for (int h = 0; h < 24; ++h)
    if (by_hour[h].empty())
      throw ValidationError("no observations for hour-of-day " + std::to_string(h));

  PercentileProfile p;
  p.levels = levels;
  p.values.assign(levels.size(), std::vector<double>(24));
  for (int h = 0; h < 24; ++h) {
    std::sort(by_hour[h].begin(), by_hour[h].end());
    const auto& v = by_hour[h];
    for (std::size_t l = 0; l < levels.size(); ++l)
      p.values[l][h] = v[static_cast<std::size_t>(
          std::floor(levels[l] * static_cast<double>(v.size() - 1)))];
  }
  return p;
}

}  // namespace kea::telemetry
