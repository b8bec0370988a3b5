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

// Reference implementations used only by tests. Each one is written the
// slow, obvious way and shares no code with the library beyond plain types.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kea/pricing.h"
#include "kea/telemetry.h"
#include "kea/whatif.h"

namespace kea::oracle {

struct Line {
  double intercept = 0;
  double slope = 0;
};

// Ordinary least squares via the normal equations, in long double.
inline Line Ols(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  long double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {static_cast<double>((sy - slope * sx) / n), static_cast<double>(slope)};
}

// Direct softmax over 24 hours without max subtraction, in long double.
inline long double LogitProbability(double alpha, double beta, int x, int x0,
                                    const pricing::PriceSchedule& s, bool circular = true) {
  auto price = [&](int h) -> long double {
    bool in;
    if (s.window.start == s.window.end) {
      in = false;
    } else if (s.window.start < s.window.end) {
      in = h >= s.window.start && h < s.window.end;
    } else {
      in = h >= s.window.start || h < s.window.end;
    }
    return in ? static_cast<long double>(s.base_price) * (1.0L - s.discount) : s.base_price;
  };
  auto dist = [&](int a, int b) -> long double {
    int d = a > b ? a - b : b - a;
    if (circular && 24 - d < d) d = 24 - d;
    return d;
  };
  auto weight = [&](int h) {
    return std::exp(static_cast<long double>(alpha) * dist(h, x0) +
                    static_cast<long double>(beta) * price(h));
  };
  long double z = 0;
  for (int h = 0; h < 24; ++h) z += weight(h);
  return weight(x) / z;
}

inline double LowerQuantileBySort(std::vector<double> v, double level) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(std::floor(level * (v.size() - 1)))];
}

// Yarn optimum by full enumeration: list every vector m in the box, keep the
// feasible ones, then pick max total, min latency, lexicographically smallest.
struct YarnAnswer {
  std::vector<int> m;  // group order = ascending group_id
  double total = 0;
  double latency = 0;
  double baseline_latency = 0;
};

inline YarnAnswer NaiveYarn(std::vector<whatif::GroupModelSet> models,
                            const std::map<std::string, int>& counts, int delta, int floor) {
  std::sort(models.begin(), models.end(),
            [](const auto& a, const auto& b) { return a.group_id < b.group_id; });
  const std::size_t K = models.size();
  auto lin = [](const whatif::LinearModel& f, double v) { return f.intercept + f.slope * v; };
  auto evaluate = [&](const std::vector<int>& m, double& total, double& latency) {
    double num = 0, den = 0;
    total = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& s = models[k];
      int n = counts.at(s.group_id);
      double x = lin(s.g, m[k]);
      if (x < 0) x = 0;
      if (x > 100) x = 100;
      double l = lin(s.h, x);
      if (l < 0) l = 0;
      double w = lin(s.f, x);
      if (w < 0) w = 0;
      total += static_cast<double>(m[k]) * n;
      num += w * l * n;
      den += l * n;
    }
    latency = num / den;
    return den > 0;
  };

  std::vector<int> base(K), lo(K), hi(K);
  for (std::size_t k = 0; k < K; ++k) {
    base[k] = static_cast<int>(std::lround(models[k].m_current));
    lo[k] = std::max(base[k] - delta, std::min(floor, base[k]));
    hi[k] = base[k] + delta;
  }
  YarnAnswer ans;
  double t;
  evaluate(base, t, ans.baseline_latency);

  std::vector<std::vector<int>> all{{}};
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : all)
      for (int v = lo[k]; v <= hi[k]; ++v) {
        auto e = prefix;
        e.push_back(v);
        next.push_back(e);
      }
    all = next;
  }
  bool found = false;
  for (const auto& m : all) {
    double total, latency;
    if (!evaluate(m, total, latency)) continue;
    if (latency > ans.baseline_latency) continue;
    bool better = !found || total > ans.total ||
                  (total == ans.total && latency < ans.latency) ||
                  (total == ans.total && latency == ans.latency && m < ans.m);
    if (better) {
      found = true;
      ans.m = m;
      ans.total = total;
      ans.latency = latency;
    }
  }
  return ans;
}

// Diurnal demand with noise, whole days from midnight. The daily peak hour is
// drawn from [peak_lo, peak_hi).
template <class Rng>
telemetry::DemandSeries RandomDemand(Rng& rng, int days, double level, int peak_lo = 0,
                                     int peak_hi = 24) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  telemetry::DemandSeries d;
  double peak = peak_lo + std::floor(u(rng) * (peak_hi - peak_lo));
  double amp = 0.2 + 0.6 * u(rng);
  double share = 0.3 + 0.5 * u(rng);
  for (int t = 0; t < days * 24; ++t) {
    double shape = 1 + amp * std::cos(2 * M_PI * ((t % 24) - peak) / 24.0);
    double total = std::max(0.0, level * shape * (0.85 + 0.3 * u(rng)));
    d.hours.push_back(473352 + t);
    d.total.push_back(total);
    d.high_priority.push_back(total * share);
  }
  return d;
}

inline std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace kea::oracle
