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

#include "kea/run_config.h"

#include <fstream>

#include "kea/common.h"

namespace kea::config {

using nlohmann::json;

namespace {

json Group(const std::string& id, int machines, double base, double cpu_a, double cpu_b,
           double tasks_b, double lat_a, double lat_b, double ssd_b, double ram_b) {
  return {{"group_id", id},
          {"machine_count", machines},
          {"machines_per_rack", 10},
          {"base_containers", base},
          {"cpu_intercept", cpu_a},
          {"cpu_per_container", cpu_b},
          {"tasks_intercept", 0.0},
          {"tasks_per_cpu", tasks_b},
          {"latency_intercept", lat_a},
          {"latency_per_cpu", lat_b},
          {"cores_per_container", 1.5},
          {"ssd_intercept", 60.0},
          {"ssd_per_core", ssd_b},
          {"ram_intercept", 12.0},
          {"ram_per_core", ram_b},
          {"bytes_per_task", 2.0e9}};
}

}  // namespace

json Defaults() {
  json d;
  d["seed"] = nullptr;
  d["output_dir"] = "out";
  d["telemetry"] = {
      {"input", ""},
      {"days", 7},
      {"start", "2024-01-01T00:00:00Z"},
      {"peak_hour", 4},
      {"diurnal_amplitude", 0.3},
      {"capacity_containers", 0.0},
      {"high_priority_share", 0.6},
      {"noise",
       {{"containers", 0.8}, {"cpu", 3.0}, {"tasks", 2.0}, {"latency", 0.4},
        {"ssd", 15.0}, {"ram", 3.0}}},
      {"groups", json::array({
                     Group("SC1-Gen1.1", 20, 7.0, 5.0, 8.0, 1.2, 20.0, 0.30, 22.0, 4.0),
                     Group("SC1-Gen4.1", 20, 9.0, 4.0, 6.0, 1.6, 14.0, 0.12, 26.0, 4.5),
                     Group("SC2-Gen1.1", 20, 7.0, 5.0, 7.5, 1.3, 18.0, 0.25, 24.0, 4.0),
                     Group("SC2-Gen4.1", 20, 9.0, 4.0, 5.5, 1.7, 12.0, 0.10, 28.0, 4.5),
                 })},
  };
  d["models"] = {
      {"input", ""},
      {"delta", nullptr},
      {"huber_tuning", 1.35},
      {"max_iters", 100},
      {"tol", 1e-8},
      {"min_samples", 30},
      {"m_current", "median"},
      {"daily_aggregation", false},
  };
  d["optimizer"] = {
      {"delta_max", 1},
      {"m_floor", 1},
      {"mode", "exhaustive"},
      {"compare_percentile", nullptr},
  };
  d["sku"] = {
      {"input", ""},
      {"group_id", ""},
      {"c_max", 128},
      {"ssd_min", 0.0},
      {"ssd_max", 0.0},
      {"ssd_points", 20},
      {"ram_min", 0.0},
      {"ram_max", 0.0},
      {"ram_points", 20},
      {"draws", 1000},
      {"sampling", "joint"},
      {"unit_core", 1.0},
      {"unit_ssd_gb", 0.01},
      {"unit_ram_gb", 0.05},
      {"strand_ssd", 500.0},
      {"strand_ram", 500.0},
  };
  d["pricing"] = {
      {"demand_input", ""},
      {"capacity", 0.0},
      {"flexible_share", 0.3},
      {"alpha", -0.5},
      {"beta", -2.0},
      {"distance", "circular"},
      {"discounts", {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5}},
      {"oversub_ratios", {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35}},
      {"window_hours", {4, 6, 8, 12}},
      {"slas", {0.5, 0.75, 0.9, 0.95, 0.99}},
      {"window_start", 16},
      {"base_cost_per_slot_hour", 1.0},
      {"adhoc_premium", 3.0},
      {"base_token_price", 1.0},
  };
  d["flighting"] = {
      {"input", ""},
      {"capping_input", ""},
      {"baseline", "A"},
      {"variance", "pooled"},
  };
  return d;
}

namespace {

bool SameKind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Like RFC 7386 merge but explicit nulls are kept as values.
void MergeInto(json& target, const json& patch) {
  if (patch.is_object() && target.is_object()) {
    for (const auto& [key, v] : patch.items()) MergeInto(target[key], v);
  } else {
    target = patch;
  }
}

}  // namespace

void CheckKnownKeys(const json& value, const json& schema, const std::string& path) {
  if (schema.is_null()) return;
  if (!SameKind(value, schema))
    throw ValidationError("config key '" + path + "' expects a " + schema.type_name() +
                          ", got " + value.type_name());
  if (schema.is_object()) {
    for (const auto& [key, v] : value.items()) {
      std::string child = path.empty() ? key : path + "." + key;
      if (!schema.contains(key)) throw ValidationError("unknown config key '" + child + "'");
      CheckKnownKeys(v, schema.at(key), child);
    }
  } else if (schema.is_array() && !schema.empty()) {
    for (std::size_t i = 0; i < value.size(); ++i)
      CheckKnownKeys(value[i], schema.front(), path + "[" + std::to_string(i) + "]");
  }
}

void ApplyOverride(json& config, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override must look like key=value: '" + assignment + "'");
  std::string key = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &config;
  std::size_t start = 0;
  while (true) {
    auto dot = key.find('.', start);
    std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("malformed override key '" + key + "'");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ValidationError("override key '" + key + "' is not a section");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

json Resolve(const Layers& layers) {
  json schema = Defaults();
  json config = schema;
  if (layers.file) {
    if (!std::filesystem::exists(*layers.file))
      throw ValidationError("missing config file: " + layers.file->string());
    std::ifstream in(*layers.file);
    json file = json::parse(in, nullptr, false);
    if (file.is_discarded() || !file.is_object())
      throw ValidationError("config file is not a JSON object: " + layers.file->string());
    CheckKnownKeys(file, schema);
    MergeInto(config, file);
  }
  json overrides = json::object();
  for (const auto& o : layers.overrides) ApplyOverride(overrides, o);
  CheckKnownKeys(overrides, schema);
  MergeInto(config, overrides);
  if (layers.seed) config["seed"] = *layers.seed;
  if (layers.output_dir) config["output_dir"] = *layers.output_dir;
  CheckKnownKeys(config, schema);
  return config;
}

}  // namespace kea::config
