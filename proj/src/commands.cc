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

#include "kea/commands.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "kea/common.h"
#include "kea/flighting.h"
#include "kea/pricing.h"
#include "kea/sku.h"
#include "kea/telemetry.h"
#include "kea/whatif.h"
#include "kea/yarn.h"

namespace kea::commands {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Paths = std::vector<fs::path>;

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw RuntimeError("cannot create output directory " + dir.string());
}

std::ifstream OpenInput(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("missing input file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  return in;
}

json ReadJson(const fs::path& path) {
  auto in = OpenInput(path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError(path.string() + " is not valid JSON");
  return j;
}

std::string Dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// Explicit path from the config, else the artifact an earlier command wrote.
fs::path InputPath(const json& section, const std::string& key, const fs::path& out_dir,
                   const std::string& fallback) {
  std::string explicit_path = section.at(key).get<std::string>();
  return explicit_path.empty() ? out_dir / fallback : fs::path(explicit_path);
}

uint64_t RequireSeed(const json& config, const std::string& command) {
  if (config.at("seed").is_null())
    throw ValidationError(command + " is stochastic and needs a seed (--seed or \"seed\")");
  if (!config.at("seed").is_number_integer())
    throw ValidationError("seed must be an integer");
  return static_cast<uint64_t>(config.at("seed").get<long long>());
}

template <class Enum>
Enum Choose(const json& value, const std::string& key,
            const std::vector<std::pair<std::string, Enum>>& options) {
  std::string v = value.get<std::string>();
  for (const auto& [name, e] : options)
    if (name == v) return e;
  std::string allowed;
  for (const auto& o : options) allowed += (allowed.empty() ? "" : ", ") + o.first;
  throw ValidationError(key + " must be one of {" + allowed + "}, got '" + v + "'");
}

// -- gen ---------------------------------------------------------------------

telemetry::SyntheticSpec SpecFrom(const json& t) {
  telemetry::SyntheticSpec spec;
  spec.days = t.at("days").get<int>();
  spec.start_hour = telemetry::ParseHour(t.at("start").get<std::string>());
  spec.peak_hour = t.at("peak_hour").get<int>();
  spec.diurnal_amplitude = t.at("diurnal_amplitude").get<double>();
  spec.capacity_containers = t.at("capacity_containers").get<double>();
  spec.high_priority_share = t.at("high_priority_share").get<double>();
  const json& n = t.at("noise");
  spec.noise = {n.at("containers").get<double>(), n.at("cpu").get<double>(),
                n.at("tasks").get<double>(),      n.at("latency").get<double>(),
                n.at("ssd").get<double>(),        n.at("ram").get<double>()};
  for (const json& g : t.at("groups")) {
    telemetry::SyntheticGroupSpec d;
    if (!g.contains("group_id")) throw ValidationError("every synthetic group needs a group_id");
    d.group_id = g.at("group_id").get<std::string>();
    d.machine_count = g.value("machine_count", d.machine_count);
    d.machines_per_rack = g.value("machines_per_rack", d.machines_per_rack);
    d.base_containers = g.value("base_containers", d.base_containers);
    d.cpu_intercept = g.value("cpu_intercept", d.cpu_intercept);
    d.cpu_per_container = g.value("cpu_per_container", d.cpu_per_container);
    d.tasks_intercept = g.value("tasks_intercept", d.tasks_intercept);
    d.tasks_per_cpu = g.value("tasks_per_cpu", d.tasks_per_cpu);
    d.latency_intercept = g.value("latency_intercept", d.latency_intercept);
    d.latency_per_cpu = g.value("latency_per_cpu", d.latency_per_cpu);
    d.cores_per_container = g.value("cores_per_container", d.cores_per_container);
    d.ssd_intercept = g.value("ssd_intercept", d.ssd_intercept);
    d.ssd_per_core = g.value("ssd_per_core", d.ssd_per_core);
    d.ram_intercept = g.value("ram_intercept", d.ram_intercept);
    d.ram_per_core = g.value("ram_per_core", d.ram_per_core);
    d.bytes_per_task = g.value("bytes_per_task", d.bytes_per_task);
    spec.groups.push_back(d);
  }
  return spec;
}

struct MachineTotals {
  double hours = 0, tasks = 0, latency = 0, cpu = 0, bytes = 0, cores = 0;
};

std::map<std::string, MachineTotals> PerMachine(const telemetry::TelemetryDataset& d) {
  std::map<std::string, MachineTotals> totals;
  for (const auto& o : d.observations) {
    auto& t = totals[o.machine_id];
    t.hours += 1;
    t.tasks += o.tasks_finished;
    t.latency += o.avg_task_latency_s;
    t.cpu += o.cpu_util_pct;
    t.bytes += o.total_data_read_bytes;
    t.cores += o.cores_used;
  }
  return totals;
}

// A/B rosters from the rack-alternating design over the generated machines.
// Both files are derived from the telemetry itself, so they carry no built-in
// treatment effect.
std::pair<std::string, std::string> FlightSamplesCsv(const telemetry::TelemetryDataset& d) {
  std::vector<flighting::Machine> machines;
  for (const auto& g : d.groups)
    for (const auto& [machine, rack] : g.rack_of) machines.push_back({machine, rack});
  auto assignment = flighting::AssignGroups(flighting::IdealDesign{}, machines);
  auto totals = PerMachine(d);

  std::ostringstream flight, capping;
  flight << "group,metric,value\n";
  capping << "group,total_data_read,cpu_time,execution_time\n";
  for (const auto& [machine, label] : assignment.labels) {
    const auto& t = totals.at(machine);
    flight << label << ",Tasks per hour," << FormatDouble(t.tasks / t.hours) << "\n"
           << label << ",Task latency (s)," << FormatDouble(t.latency / t.hours) << "\n"
           << label << ",CPU utilization (%)," << FormatDouble(t.cpu / t.hours) << "\n"
           << label << ",Data read (GB per hour)," << FormatDouble(t.bytes / t.hours / 1e9)
           << "\n";
    capping << label << "," << FormatDouble(t.bytes) << "," << FormatDouble(t.cores * 3600.0)
            << "," << FormatDouble(t.hours * 3600.0) << "\n";
  }
  return {flight.str(), capping.str()};
}

Paths Gen(const json& config, const fs::path& out_dir, std::ostream& summary) {
  uint64_t seed = RequireSeed(config, "gen");
  auto spec = SpecFrom(config.at("telemetry"));
  auto dataset = telemetry::GenerateSyntheticCluster(spec, seed);

  fs::path telemetry_csv = out_dir / "gen_telemetry.csv";
  fs::path demand_csv = out_dir / "gen_demand.csv";
  telemetry::SaveTelemetry(dataset, telemetry_csv);
  telemetry::SaveDemand(telemetry::HourlyDemandProfile(dataset), demand_csv);
  auto [flight, capping] = FlightSamplesCsv(dataset);
  Paths paths{telemetry_csv, telemetry::MetadataPath(telemetry_csv), demand_csv,
              EmitReport(out_dir, "gen", "flighting", "csv", flight),
              EmitReport(out_dir, "gen", "capping", "csv", capping)};

  int machines = 0;
  for (const auto& g : dataset.groups) machines += g.machine_count;
  summary << "Generated " << dataset.observations.size() << " hourly rows for " << machines
          << " machines in " << dataset.groups.size() << " groups over " << spec.days
          << " days with seed " << seed << "; cluster capacity is "
          << FormatFixed(dataset.capacity_containers, 1)
          << " containers. Wrote telemetry, hourly demand and A/B flighting samples to "
          << out_dir.string() << ".\n";
  return paths;
}

// -- fit ---------------------------------------------------------------------

whatif::FitOptions FitOptionsFrom(const json& m) {
  whatif::FitOptions o;
  if (!m.at("delta").is_null()) {
    if (!m.at("delta").is_number()) throw ValidationError("models.delta must be a number or null");
    o.huber.delta = m.at("delta").get<double>();
  }
  o.huber.tuning = m.at("huber_tuning").get<double>();
  o.huber.max_iters = m.at("max_iters").get<int>();
  o.huber.tol = m.at("tol").get<double>();
  if (m.at("min_samples").get<long long>() < 2)
    throw ValidationError("models.min_samples must be >= 2");
  o.min_samples = m.at("min_samples").get<std::size_t>();
  o.m_current_stat = Choose<whatif::CenterStat>(
      m.at("m_current"), "models.m_current",
      {{"median", whatif::CenterStat::kMedian}, {"mean", whatif::CenterStat::kMean}});
  o.daily_aggregation = m.at("daily_aggregation").get<bool>();
  return o;
}

fs::path TelemetryPath(const json& config, const fs::path& out_dir) {
  return InputPath(config.at("telemetry"), "input", out_dir, "gen_telemetry.csv");
}

Paths Fit(const json& config, const fs::path& out_dir, std::ostream& summary) {
  fs::path input = TelemetryPath(config, out_dir);
  auto dataset = telemetry::LoadTelemetry(input);
  auto options = FitOptionsFrom(config.at("models"));

  ordered_json sets = ordered_json::array(), resources = ordered_json::array();
  ordered_json counts = ordered_json::object();
  std::ostringstream slopes;
  for (const auto& g : dataset.groups) {
    auto set = whatif::FitModelSet(dataset, g.group_id, options);
    sets.push_back(whatif::ToJson(set));
    resources.push_back(whatif::ToJson(whatif::FitResourceModels(dataset, g.group_id, options)));
    counts[g.group_id] = g.machine_count;
    slopes << (slopes.tellp() > 0 ? ", " : "") << g.group_id << " "
           << FormatFixed(set.g.slope, 2) << " %/container";
  }
  ordered_json models{{"model_sets", sets}, {"machine_counts", counts}};
  Paths paths{EmitReport(out_dir, "fit", "models", "json", Dump(models)),
              EmitReport(out_dir, "fit", "resource_models", "json",
                         Dump(ordered_json{{"resource_models", resources}}))};
  summary << "Fitted Huber what-if models for " << dataset.groups.size() << " groups from "
          << dataset.observations.size() << " rows of " << input.filename().string()
          << "; CPU slopes: " << slopes.str() << ". Wrote model sets and resource models to "
          << out_dir.string() << ".\n";
  return paths;
}

// -- optimize-yarn -----------------------------------------------------------

struct LoadedModels {
  std::vector<whatif::GroupModelSet> sets;
  yarn::Counts counts;
};

LoadedModels LoadModels(const fs::path& path) {
  json j = ReadJson(path);
  if (!j.contains("model_sets") || !j.contains("machine_counts"))
    throw ValidationError(path.string() + " lacks model_sets or machine_counts");
  LoadedModels out;
  for (const auto& s : j.at("model_sets")) out.sets.push_back(whatif::GroupModelSetFromJson(s));
  for (const auto& [k, v] : j.at("machine_counts").items()) out.counts[k] = v.get<int>();
  return out;
}

yarn::YarnPlan Optimize(const LoadedModels& m, const json& opt) {
  int delta = opt.at("delta_max").get<int>();
  int floor = opt.at("m_floor").get<int>();
  std::string mode = opt.at("mode").get<std::string>();
  if (mode == "exhaustive") return yarn::OptimizeMaxContainers(m.sets, m.counts, delta, floor);
  if (mode == "coordinate") return yarn::CoordinateSearch(m.sets, m.counts, delta, floor);
  throw ValidationError("optimizer.mode must be exhaustive or coordinate, got '" + mode + "'");
}

Paths OptimizeYarn(const json& config, const fs::path& out_dir, std::ostream& summary) {
  auto models = LoadModels(InputPath(config.at("models"), "input", out_dir, "fit_models.json"));
  const json& opt = config.at("optimizer");
  auto plan = Optimize(models, opt);
  auto plan_json = yarn::ToJson(plan);
  std::string md = yarn::ToMarkdown(plan);

  std::string comparison;
  if (!opt.at("compare_percentile").is_null()) {
    if (!opt.at("compare_percentile").is_number())
      throw ValidationError("optimizer.compare_percentile must be a number or null");
    double level = opt.at("compare_percentile").get<double>();
    // Re-fit on the telemetry with m' taken at the requested percentile.
    auto dataset = telemetry::LoadTelemetry(TelemetryPath(config, out_dir));
    auto options = FitOptionsFrom(config.at("models"));
    options.m_current_percentile = level;
    LoadedModels alt{{}, models.counts};
    for (const auto& s : models.sets)
      alt.sets.push_back(whatif::FitModelSet(dataset, s.group_id, options));
    auto alt_plan = Optimize(alt, opt);
    bool same = yarn::SameDirection(plan, alt_plan);
    ordered_json deltas(alt_plan.deltas);
    plan_json["percentile_comparison"] = {
        {"level", level}, {"deltas", deltas}, {"same_direction", same}};
    md += "\nWith m' at the " + FormatDouble(level) + " quantile the recommended changes " +
          (same ? "point the same way" : "differ in direction") + ".\n";
    comparison = std::string(" Re-running with m' at the ") + FormatDouble(level) +
                 " quantile gives " + (same ? "the same" : "a different") + " direction.";
  }

  Paths paths{EmitReport(out_dir, "optimize-yarn", "plan", "json", Dump(plan_json)),
              EmitReport(out_dir, "optimize-yarn", "plan", "md", md)};
  std::ostringstream changes;
  for (const auto& [g, d] : plan.deltas)
    changes << (changes.tellp() > 0 ? ", " : "") << g << " " << (d > 0 ? "+" : "") << d;
  summary << "Searched " << plan.candidate_count << " max-container configurations ("
          << plan.feasible_count << " feasible) with delta_max " << plan.delta_max
          << "; recommended changes: " << changes.str() << ". Containers go from "
          << FormatFixed(plan.baseline.total_containers, 0) << " to "
          << FormatFixed(plan.proposed.total_containers, 0) << " while the average latency W'/W is "
          << FormatFixed(plan.baseline.avg_latency, 4) << " s / "
          << FormatFixed(plan.proposed.avg_latency, 4) << " s." << comparison << "\n";
  return paths;
}

// -- design-sku --------------------------------------------------------------

whatif::ResourceModels PickResourceModels(const fs::path& path, const std::string& group_id) {
  json j = ReadJson(path);
  if (!j.contains("resource_models") || j.at("resource_models").empty())
    throw ValidationError(path.string() + " has no resource_models");
  for (const auto& r : j.at("resource_models")) {
    auto models = whatif::ResourceModelsFromJson(r);
    if (group_id.empty() || models.group_id == group_id) return models;
  }
  throw ValidationError("no resource models for group '" + group_id + "'");
}

std::vector<double> AxisGrid(const json& s, const std::string& axis, double center) {
  double lo = s.at(axis + "_min").get<double>();
  double hi = s.at(axis + "_max").get<double>();
  if (lo <= 0 && hi <= 0) {
    if (!(center > 0))
      throw ValidationError("cannot auto-range the " + axis + " grid: predicted need is not positive");
    lo = 0.5 * center;
    hi = 1.5 * center;
  }
  return sku::LinearGrid(lo, hi, s.at(axis + "_points").get<int>());
}

Paths DesignSku(const json& config, const fs::path& out_dir, std::ostream& summary) {
  uint64_t seed = RequireSeed(config, "design-sku");
  const json& s = config.at("sku");
  auto models = PickResourceModels(
      InputPath(s, "input", out_dir, "fit_resource_models.json"), s.at("group_id").get<std::string>());

  sku::CostConfig cfg;
  cfg.unit_core = s.at("unit_core").get<double>();
  cfg.unit_ssd_gb = s.at("unit_ssd_gb").get<double>();
  cfg.unit_ram_gb = s.at("unit_ram_gb").get<double>();
  cfg.strand_ssd = s.at("strand_ssd").get<double>();
  cfg.strand_ram = s.at("strand_ram").get<double>();
  cfg.c_max = s.at("c_max").get<int>();
  cfg.Validate();
  auto sampling = Choose<sku::BetaSampling>(
      s.at("sampling"), "sku.sampling",
      {{"joint", sku::BetaSampling::kJoint}, {"independent", sku::BetaSampling::kIndependent}});

  double c_max = cfg.c_max;
  auto ssd = AxisGrid(s, "ssd", whatif::Predict(models.p, c_max));
  auto ram = AxisGrid(s, "ram", whatif::Predict(models.q, c_max));
  int draws = s.at("draws").get<int>();
  auto surface = sku::ComputeCostSurface(models, ssd, ram, cfg, draws, seed, sampling);
  auto best = sku::PickDesign(surface);

  Paths paths{out_dir / "design-sku_surface.csv"};
  sku::SaveSurfaceCsv(surface, paths[0]);
  paths.push_back(EmitReport(out_dir, "design-sku", "summary", "md",
                             sku::SummaryMarkdown(models, surface, best, cfg)));
  summary << "Simulated a " << ssd.size() << "x" << ram.size() << " SKU cost surface for group "
          << models.group_id << " with " << draws << " beta draws per cell (seed " << seed
          << "); the cheapest design is " << FormatFixed(best.ssd_gb, 1) << " GB SSD and "
          << FormatFixed(best.ram_gb, 1) << " GB RAM at expected cost " << FormatFixed(best.cost, 4)
          << " per container.\n";
  return paths;
}

// -- price -------------------------------------------------------------------

template <class T>
std::vector<T> ListOf(const json& p, const std::string& key) {
  if (!p.at(key).is_array() || p.at(key).empty())
    throw ValidationError("pricing." + key + " must be a non-empty list");
  return p.at(key).get<std::vector<T>>();
}

Paths Price(const json& config, const fs::path& out_dir, std::ostream& summary) {
  const json& p = config.at("pricing");
  auto demand = telemetry::LoadDemand(InputPath(p, "demand_input", out_dir, "gen_demand.csv"));
  if (demand.size() == 0) throw ValidationError("demand series is empty");

  pricing::ScenarioInputs inputs;
  inputs.capacity = p.at("capacity").get<double>();
  if (inputs.capacity <= 0) {
    // Same rule the generator uses: 10% headroom over the peak hour.
    inputs.capacity = 1.1 * *std::max_element(demand.total.begin(), demand.total.end());
  }
  inputs.flexible_share = p.at("flexible_share").get<double>();
  inputs.params = {p.at("alpha").get<double>(), p.at("beta").get<double>()};
  inputs.finance = {p.at("base_cost_per_slot_hour").get<double>(),
                    p.at("adhoc_premium").get<double>(), p.at("base_token_price").get<double>()};
  inputs.mode = Choose<pricing::Distance>(
      p.at("distance"), "pricing.distance",
      {{"circular", pricing::Distance::kCircular}, {"linear", pricing::Distance::kLinear}});

  pricing::ScenarioGrid grid;
  grid.discounts = ListOf<double>(p, "discounts");
  grid.oversub_ratios = ListOf<double>(p, "oversub_ratios");
  grid.window_hours = ListOf<int>(p, "window_hours");
  grid.slas = ListOf<double>(p, "slas");
  grid.window_start = p.at("window_start").get<int>();

  auto table = pricing::EnumerateScenarios(demand, grid, inputs);
  const auto& best = table.best;
  auto detail = pricing::EvaluateScenarioDetailed(
      demand, {best.discount, best.oversub_ratio, best.window, best.sla}, inputs);
  auto status_quo = pricing::EvaluateScenario(demand, {0.0, 0.0, best.window, best.sla}, inputs);

  Paths paths{out_dir / "price_scenarios.csv", out_dir / "price_shifted_demand.csv"};
  pricing::SaveScenarioCsv(table.rows, paths[0]);
  pricing::SaveShiftedDemandCsv(detail.shift, paths[1]);

  std::ostringstream md;
  md << "# Pricing scenarios\n\n"
     << "Scenarios evaluated: " << table.rows.size() << "\n"
     << "Capacity: " << FormatFixed(inputs.capacity, 2) << " containers\n\n"
     << "| Scenario | Discount | Oversubscription | Window | SLA | Tokens | Peak overflow | "
        "Cost per container |\n|---|---|---|---|---|---|---|---|\n";
  auto row = [&](const char* name, const pricing::PricingScenario& s) {
    md << "| " << name << " | " << FormatFixed(s.discount, 2) << " | "
       << FormatFixed(s.oversub_ratio, 2) << " | " << s.window.start << ":00-" << s.window.end
       << ":00 | " << FormatFixed(s.sla, 2) << " | " << FormatFixed(s.tokens_available, 2) << " | "
       << FormatFixed(s.peak_overflow, 2) << " | " << FormatFixed(s.cost_per_container, 6)
       << " |\n";
  };
  row("best", best);
  row("no discount, no oversubscription", status_quo);
  double saving = (status_quo.cost_per_container - best.cost_per_container) /
                  status_quo.cost_per_container * 100.0;
  md << "\nCost per container change vs. status quo: " << FormatFixed(-saving, 2) << "%\n";
  paths.push_back(EmitReport(out_dir, "price", "summary", "md", md.str()));

  summary << "Evaluated " << table.rows.size() << " pricing scenarios over " << demand.size()
          << " hours of demand; the best uses a " << FormatFixed(best.discount * 100, 0)
          << "% discount on " << best.window.start << ":00-" << best.window.end
          << ":00 with oversubscription " << FormatFixed(best.oversub_ratio, 2) << " at SLA "
          << FormatFixed(best.sla, 2) << ", costing " << FormatFixed(best.cost_per_container, 6)
          << " per container (" << FormatFixed(saving, 2)
          << "% below the unshifted, non-oversubscribed baseline).\n";
  return paths;
}

// -- flight-analyze ----------------------------------------------------------

// group,metric,value -> metric -> label -> samples, metrics in file order.
struct FlightSamples {
  std::vector<std::string> metrics;
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  std::vector<std::string> labels;
};

std::vector<std::vector<std::string>> ReadCsv(const fs::path& path, const std::string& header) {
  auto in = OpenInput(path);
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ValidationError(path.string() + ": expected header '" + header + "'");
  std::size_t width = SplitCsvLine(header).size();
  std::vector<std::vector<std::string>> rows;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    auto fields = SplitCsvLine(line);
    if (fields.size() != width)
      throw ValidationError(path.filename().string() + " line " + std::to_string(line_no) +
                            ": expected " + std::to_string(width) + " fields");
    rows.emplace_back(fields.begin(), fields.end());
  }
  return rows;
}

Paths FlightAnalyze(const json& config, const fs::path& out_dir, std::ostream& summary) {
  const json& f = config.at("flighting");
  std::string baseline = f.at("baseline").get<std::string>();
  auto variance = Choose<flighting::Variance>(
      f.at("variance"), "flighting.variance",
      {{"pooled", flighting::Variance::kPooled}, {"welch", flighting::Variance::kWelch}});

  FlightSamples s;
  for (const auto& r : ReadCsv(InputPath(f, "input", out_dir, "gen_flighting.csv"),
                               "group,metric,value")) {
    if (std::find(s.metrics.begin(), s.metrics.end(), r[1]) == s.metrics.end())
      s.metrics.push_back(r[1]);
    if (std::find(s.labels.begin(), s.labels.end(), r[0]) == s.labels.end())
      s.labels.push_back(r[0]);
    s.values[r[1]][r[0]].push_back(ParseDouble(r[2], "value"));
  }
  std::sort(s.labels.begin(), s.labels.end());
  if (s.labels.size() != 2 ||
      std::find(s.labels.begin(), s.labels.end(), baseline) == s.labels.end())
    throw ValidationError("flighting samples need exactly two groups including baseline '" +
                          baseline + "'");
  std::string treatment = s.labels[0] == baseline ? s.labels[1] : s.labels[0];

  std::vector<flighting::EffectRow> rows;
  int significant = 0;
  for (const auto& metric : s.metrics) {
    auto& by_label = s.values[metric];
    rows.push_back(flighting::TreatmentEffect(by_label[baseline], by_label[treatment], metric,
                                              variance));
    significant += rows.back().test.significant_at_95;
  }

  std::map<std::string, std::vector<flighting::CappingSample>> capping;
  for (const auto& r : ReadCsv(InputPath(f, "capping_input", out_dir, "gen_capping.csv"),
                               "group,total_data_read,cpu_time,execution_time"))
    capping[r[0]].push_back({ParseDouble(r[1], "total_data_read"), ParseDouble(r[2], "cpu_time"),
                             ParseDouble(r[3], "execution_time")});
  auto capping_rows = flighting::CappingReport(capping, baseline);

  Paths paths{
      EmitReport(out_dir, "flight-analyze", "report", "md",
                 "# Flighting report\n\n" +
                     flighting::EffectTable(rows, "Group " + baseline, "Group " + treatment)),
      EmitReport(out_dir, "flight-analyze", "capping", "md",
                 "# Capping comparison\n\n" + flighting::CappingMarkdown(capping_rows, baseline))};
  summary << "Compared group " << treatment << " against baseline " << baseline << " on "
          << rows.size() << " metrics; " << significant
          << " differ significantly at the 95% level. Capping ratios were compared for "
          << capping.size() - 1 << " non-baseline group" << (capping.size() == 2 ? "" : "s")
          << ". Reports are in " << out_dir.string()
          << ".\n";
  return paths;
}

using Handler = std::function<Paths(const json&, const fs::path&, std::ostream&)>;

const std::map<std::string, Handler>& Handlers() {
  static const std::map<std::string, Handler> handlers{
      {"gen", Gen},           {"fit", Fit},     {"optimize-yarn", OptimizeYarn},
      {"design-sku", DesignSku}, {"price", Price}, {"flight-analyze", FlightAnalyze}};
  return handlers;
}

}  // namespace

const std::vector<std::string>& CommandNames() {
  static const std::vector<std::string> names{"gen",        "fit",   "optimize-yarn",
                                              "design-sku", "price", "flight-analyze"};
  return names;
}

fs::path EmitReport(const fs::path& dir, const std::string& command, const std::string& name,
                    const std::string& ext, const std::string& content) {
  EnsureDir(dir);
  fs::path path = dir / (command + "_" + name + "." + ext);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << content;
  if (!out) throw RuntimeError("write failed: " + path.string());
  return path;
}

Paths Execute(const std::string& command, const json& config, std::ostream& summary) {
  auto it = Handlers().find(command);
  if (it == Handlers().end()) throw ValidationError("unknown command '" + command + "'");
  fs::path out_dir = config.at("output_dir").get<std::string>();
  EnsureDir(out_dir);
  return it->second(config, out_dir, summary);
}

int Run(const std::string& command, const config::Layers& layers, std::ostream& out,
        std::ostream& err) {
  try {
    if (!Handlers().count(command)) throw ValidationError("unknown command '" + command + "'");
    json config = config::Resolve(layers);
    std::ostringstream summary;
    Execute(command, config, summary);
    out << summary.str();
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace kea::commands
