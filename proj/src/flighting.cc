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

#include "kea/flighting.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "kea/common.h"

namespace kea::flighting {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double SampleVariance(const std::vector<double>& v, double mean) {
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

Assignment AssignGroups(const ExperimentDesign& design, const std::vector<Machine>& machines) {
  if (machines.empty()) throw ValidationError("no machines to assign");
  std::set<std::string> seen;
  for (const auto& m : machines)
    if (!seen.insert(m.machine_id).second)
      throw ValidationError("duplicate machine " + m.machine_id);

  Assignment out;
  std::visit(
      Overloaded{
          [&](const IdealDesign&) {
            std::map<std::string, std::vector<std::string>> racks;
            for (const auto& m : machines) {
              if (m.rack_id.empty())
                throw ValidationError("ideal design needs a rack for " + m.machine_id);
              racks[m.rack_id].push_back(m.machine_id);
            }
            for (auto& [rack, ids] : racks) {
              if (ids.size() < 2) {
                out.excluded.insert(out.excluded.end(), ids.begin(), ids.end());
                continue;
              }
              std::sort(ids.begin(), ids.end());
              // Odd racks leave their last machine in A.
              for (std::size_t i = 0; i < ids.size(); ++i) out.labels[ids[i]] = i % 2 ? "B" : "A";
            }
          },
          [&](const TimeSlicingDesign& d) {
            if (d.slice_hours < 1 || d.slice_hours % 24 == 0)
              throw ValidationError("slice length must be >= 1 hour and not a multiple of 24");
            for (const auto& m : machines) out.labels[m.machine_id] = kTimeSlicedLabel;
          },
          [&](const HybridDesign& d) {
            for (const auto& m : machines) {
              auto it = d.roster.find(m.machine_id);
              if (it == d.roster.end())
                out.excluded.push_back(m.machine_id);
              else
                out.labels[m.machine_id] = it->second;
            }
          },
      },
      design);
  return out;
}

std::string TimeSliceLabel(int64_t hour, int slice_hours) {
  if (slice_hours < 1 || slice_hours % 24 == 0)
    throw ValidationError("slice length must be >= 1 hour and not a multiple of 24");
  int64_t slice = hour >= 0 ? hour / slice_hours : (hour - slice_hours + 1) / slice_hours;
  return slice % 2 == 0 ? "A" : "B";
}

double CriticalT95(double dof) {
  if (!(dof > 0)) throw ValidationError("degrees of freedom must be positive");
  boost::math::students_t dist(dof);
  return boost::math::quantile(boost::math::complement(dist, 0.025));
}

TTestResult StudentT(const std::vector<double>& sample_a, const std::vector<double>& sample_b,
                     Variance variance) {
  if (sample_a.size() < 2 || sample_b.size() < 2)
    throw ValidationError("t-test needs at least two observations per sample");
  RequireFinite(sample_a, "sample A");
  RequireFinite(sample_b, "sample B");
  const double na = static_cast<double>(sample_a.size());
  const double nb = static_cast<double>(sample_b.size());
  TTestResult r;
  r.mean_a = Mean(sample_a);
  r.mean_b = Mean(sample_b);
  double va = SampleVariance(sample_a, r.mean_a);
  double vb = SampleVariance(sample_b, r.mean_b);
  double se;
  if (variance == Variance::kPooled) {
    double pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2);
    if (!(pooled > 0)) throw ValidationError("zero pooled variance");
    se = std::sqrt(pooled * (na + nb) / (na * nb));
    r.dof = na + nb - 2;
  } else {
    double qa = va / na, qb = vb / nb;
    if (!(qa + qb > 0)) throw ValidationError("zero variance in both samples");
    se = std::sqrt(qa + qb);
    r.dof = (qa + qb) * (qa + qb) / (qa * qa / (na - 1) + qb * qb / (nb - 1));
  }
  r.t_value = (r.mean_b - r.mean_a) / se;
  r.pct_change = r.mean_a != 0 ? (r.mean_b - r.mean_a) / r.mean_a * 100.0
                               : std::numeric_limits<double>::quiet_NaN();
  r.significant_at_95 = std::abs(r.t_value) > CriticalT95(r.dof);
  return r;
}

EffectRow TreatmentEffect(const std::vector<double>& before, const std::vector<double>& after,
                          const std::string& metric_name, Variance variance) {
  return {metric_name, StudentT(before, after, variance)};
}

std::string EffectTable(const std::vector<EffectRow>& rows, const std::string& label_a,
                        const std::string& label_b) {
  std::ostringstream md;
  md << "| Name | " << label_a << " | " << label_b << " | % Changes | t-value |\n"
     << "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const auto& t = r.test;
    md << "| " << r.name << " | " << FormatFixed(t.mean_a, 4) << " | " << FormatFixed(t.mean_b, 4)
       << " | " << FormatFixed(t.pct_change, 2) << "% | " << FormatFixed(t.t_value, 2)
       << (t.significant_at_95 ? "" : " (n.s.)") << " |\n";
  }
  return md.str();
}

const char* MetricName(CappingMetric m) {
  return m == CappingMetric::kBytesPerCpuTime ? "Bytes per CPU Time" : "Bytes per Second";
}

namespace {

double Denominator(const CappingSample& s, CappingMetric m) {
  return m == CappingMetric::kBytesPerCpuTime ? s.cpu_time : s.execution_time;
}

double Aggregate(const std::vector<CappingSample>& samples, CappingMetric m,
                 const std::string& group) {
  double read = 0, time = 0;
  for (const auto& s : samples) {
    read += s.total_data_read;
    time += Denominator(s, m);
  }
  if (!(time > 0))
    throw ValidationError(std::string("zero ") + MetricName(m) + " denominator for group " + group);
  return read / time;
}

std::vector<double> Ratios(const std::vector<CappingSample>& samples, CappingMetric m,
                           const std::string& group) {
  std::vector<double> r;
  for (const auto& s : samples) {
    double d = Denominator(s, m);
    if (!(d > 0)) throw ValidationError("zero time denominator in group " + group);
    r.push_back(s.total_data_read / d);
  }
  return r;
}

}  // namespace

std::vector<CappingRow> CappingReport(const std::map<std::string, std::vector<CappingSample>>& groups,
                                      const std::string& baseline_label,
                                      const std::vector<CappingMetric>& metrics) {
  auto base = groups.find(baseline_label);
  if (base == groups.end()) throw ValidationError("baseline group '" + baseline_label + "' missing");
  std::vector<CappingRow> rows;
  for (const auto& [label, samples] : groups) {
    if (label == baseline_label) continue;
    for (CappingMetric m : metrics) {
      CappingRow row;
      row.group = label;
      row.metric = m;
      row.baseline_value = Aggregate(base->second, m, baseline_label);
      row.group_value = Aggregate(samples, m, label);
      row.pct_vs_baseline = (row.group_value - row.baseline_value) / row.baseline_value * 100.0;
      row.test = StudentT(Ratios(base->second, m, baseline_label), Ratios(samples, m, label));
      rows.push_back(row);
    }
  }
  return rows;
}

std::string CappingMarkdown(const std::vector<CappingRow>& rows, const std::string& baseline_label) {
  std::ostringstream md;
  md << "| Group | Metric | " << baseline_label << " | Group value | % vs " << baseline_label
     << " | t-value |\n|---|---|---|---|---|---|\n";
  for (const auto& r : rows)
    md << "| " << r.group << " | " << MetricName(r.metric) << " | "
       << FormatFixed(r.baseline_value, 4) << " | " << FormatFixed(r.group_value, 4) << " | "
       << FormatFixed(r.pct_vs_baseline, 2) << "% | " << FormatFixed(r.test.t_value, 2) << " |\n";
  return md.str();
}

}  // namespace kea::flighting
