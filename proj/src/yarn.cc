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

#include "kea/yarn.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kea/common.h"

namespace kea::yarn {

namespace {

GroupOutcome Outcome(const whatif::GroupModelSet& s, int m) {
  GroupOutcome o;
  o.m = m;
  o.x = std::clamp(whatif::Predict(s.g, m), 0.0, 100.0);
  o.l = std::max(0.0, whatif::Predict(s.h, o.x));
  o.w = std::max(0.0, whatif::Predict(s.f, o.x));
  return o;
}

// Per-group terms of the cluster aggregates for one candidate value.
struct Terms {
  int m;
  double containers;  // m * n
  double weighted;    // w * l * n
  double tasks;       // l * n
};

Terms MakeTerms(const whatif::GroupModelSet& s, int m, int n) {
  GroupOutcome o = Outcome(s, m);
  return {m, static_cast<double>(m) * n, o.w * o.l * n, o.l * n};
}

struct Problem {
  std::vector<const whatif::GroupModelSet*> groups;  // sorted by id
  std::vector<int> counts;
  std::vector<int> baseline_m;
  std::vector<std::vector<Terms>> options;  // ascending m per group
};

Problem Prepare(const std::vector<whatif::GroupModelSet>& models, const Counts& counts,
                int delta_max, int m_floor) {
  if (models.empty()) throw ValidationError("no group models supplied");
  if (delta_max < 0) throw ValidationError("delta_max must be >= 0");
  Problem p;
  for (const auto& s : models) p.groups.push_back(&s);
  std::sort(p.groups.begin(), p.groups.end(),
            [](auto* a, auto* b) { return a->group_id < b->group_id; });
  for (std::size_t k = 1; k < p.groups.size(); ++k)
    if (p.groups[k]->group_id == p.groups[k - 1]->group_id)
      throw ValidationError("duplicate group models for " + p.groups[k]->group_id);
  for (auto* s : p.groups) {
    auto it = counts.find(s->group_id);
    if (it == counts.end()) throw ValidationError("no machine count for group " + s->group_id);
    if (it->second < 1) throw ValidationError("machine count must be >= 1 for " + s->group_id);
    if (!(s->m_current >= 0) || !std::isfinite(s->m_current))
      throw ValidationError("m_current must be finite and >= 0 for " + s->group_id);
    int n = it->second;
    int base = static_cast<int>(std::lround(s->m_current));
    int lo = std::max(base - delta_max, std::min(m_floor, base));
    int hi = base + delta_max;
    std::vector<Terms> opts;
    for (int m = lo; m <= hi; ++m) opts.push_back(MakeTerms(*s, m, n));
    p.counts.push_back(n);
    p.baseline_m.push_back(base);
    p.options.push_back(std::move(opts));
  }
  return p;
}

struct Candidate {
  bool valid = false;
  double total = 0;
  double latency = 0;
  std::vector<int> m;
};

// Strict total order: more containers, then lower latency, then lexicographic m.
bool Better(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (a.total != b.total) return a.total > b.total;
  if (a.latency != b.latency) return a.latency < b.latency;
  return a.m < b.m;
}

// Aggregates in group order, identical arithmetic to EvaluateConfig.
bool Aggregate(const std::vector<const Terms*>& picks, double& total, double& latency) {
  double num = 0, den = 0;
  total = 0;
  for (const Terms* t : picks) {
    total += t->containers;
    num += t->weighted;
    den += t->tasks;
  }
  if (!(den > 0)) return false;
  latency = num / den;
  return true;
}

ClusterOutcome OutcomeFor(const Problem& p, const std::vector<int>& m) {
  std::map<std::string, int> config;
  Counts counts;
  std::vector<whatif::GroupModelSet> models;
  for (std::size_t k = 0; k < p.groups.size(); ++k) {
    config[p.groups[k]->group_id] = m[k];
    counts[p.groups[k]->group_id] = p.counts[k];
    models.push_back(*p.groups[k]);
  }
  return EvaluateConfig(models, counts, config);
}

YarnPlan MakePlan(const Problem& p, const std::vector<int>& best, int delta_max,
                  long long feasible, long long candidates) {
  YarnPlan plan;
  plan.baseline = OutcomeFor(p, p.baseline_m);
  plan.proposed = OutcomeFor(p, best);
  for (std::size_t k = 0; k < p.groups.size(); ++k)
    plan.deltas[p.groups[k]->group_id] = best[k] - p.baseline_m[k];
  plan.feasible_count = feasible;
  plan.candidate_count = candidates;
  plan.delta_max = delta_max;
  return plan;
}

}  // namespace

ClusterOutcome EvaluateConfig(const std::vector<whatif::GroupModelSet>& models,
                              const Counts& counts, const std::map<std::string, int>& m) {
  std::vector<const whatif::GroupModelSet*> sorted;
  for (const auto& s : models) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](auto* a, auto* b) { return a->group_id < b->group_id; });
  ClusterOutcome out;
  double num = 0, den = 0;
  for (auto* s : sorted) {
    auto cit = counts.find(s->group_id);
    if (cit == counts.end()) throw ValidationError("no machine count for group " + s->group_id);
    auto mit = m.find(s->group_id);
    if (mit == m.end()) throw ValidationError("no container limit for group " + s->group_id);
    if (mit->second < 0) throw ValidationError("negative container limit for " + s->group_id);
    Terms t = MakeTerms(*s, mit->second, cit->second);
    out.per_group[s->group_id] = Outcome(*s, mit->second);
    out.total_containers += t.containers;
    num += t.weighted;
    den += t.tasks;
  }
  for (const auto& [gid, v] : m)
    if (!out.per_group.count(gid)) throw ValidationError("no models for group " + gid);
  if (!(den > 0))
    throw RuntimeError("average latency undefined: predicted task throughput is zero");
  out.avg_latency = num / den;
  return out;
}

YarnPlan OptimizeMaxContainers(const std::vector<whatif::GroupModelSet>& models,
                               const Counts& counts, int delta_max, int m_floor) {
  Problem p = Prepare(models, counts, delta_max, m_floor);
  const std::size_t K = p.groups.size();
  if (std::pow(2.0 * delta_max + 1.0, static_cast<double>(K)) > kMaxCandidates)
    throw ValidationError("search space (2*delta_max+1)^K exceeds 1e7 candidates; "
                          "use coordinate-search mode");

  ClusterOutcome base = OutcomeFor(p, p.baseline_m);
  const double limit = base.avg_latency;

  long long n_candidates = 1;
  for (const auto& o : p.options) n_candidates *= static_cast<long long>(o.size());

  // Candidate index is mixed-radix with group 0 most significant, so index
  // order equals lexicographic order of m.
  const std::size_t chunks = std::max<std::size_t>(1, std::min<long long>(n_candidates, 256));
  std::vector<Candidate> chunk_best(chunks);
  std::vector<long long> chunk_feasible(chunks, 0);
  ParallelFor(chunks, [&](std::size_t c) {
    long long begin = n_candidates * static_cast<long long>(c) / static_cast<long long>(chunks);
    long long end = n_candidates * static_cast<long long>(c + 1) / static_cast<long long>(chunks);
    std::vector<const Terms*> picks(K);
    Candidate best, cur;
    cur.valid = true;
    cur.m.resize(K);
    for (long long idx = begin; idx < end; ++idx) {
      long long rest = idx;
      for (std::size_t k = K; k-- > 0;) {
        auto radix = static_cast<long long>(p.options[k].size());
        picks[k] = &p.options[k][static_cast<std::size_t>(rest % radix)];
        cur.m[k] = picks[k]->m;
        rest /= radix;
      }
      if (!Aggregate(picks, cur.total, cur.latency)) continue;
      if (cur.latency > limit) continue;
      ++chunk_feasible[c];
      if (Better(cur, best)) best = cur;
    }
    chunk_best[c] = std::move(best);
  });

  Candidate best;
  long long feasible = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    feasible += chunk_feasible[c];
    if (Better(chunk_best[c], best)) best = chunk_best[c];
  }
  if (!best.valid) throw RuntimeError("no feasible configuration (baseline infeasible)");
  return MakePlan(p, best.m, delta_max, feasible, n_candidates);
}

YarnPlan CoordinateSearch(const std::vector<whatif::GroupModelSet>& models,
                          const Counts& counts, int delta_max, int m_floor, int max_sweeps) {
  Problem p = Prepare(models, counts, delta_max, m_floor);
  const std::size_t K = p.groups.size();
  ClusterOutcome base = OutcomeFor(p, p.baseline_m);
  const double limit = base.avg_latency;

  std::vector<std::size_t> choice(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < p.options[k].size(); ++i)
      if (p.options[k][i].m == p.baseline_m[k]) choice[k] = i;

  auto evaluate = [&](const std::vector<std::size_t>& ch) {
    Candidate c;
    std::vector<const Terms*> picks(K);
    c.m.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      picks[k] = &p.options[k][ch[k]];
      c.m[k] = picks[k]->m;
    }
    c.valid = Aggregate(picks, c.total, c.latency) && c.latency <= limit;
    return c;
  };

  Candidate best = evaluate(choice);
  long long evaluated = 1;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (std::size_t k = 0; k < K; ++k) {
      auto trial = choice;
      for (std::size_t i = 0; i < p.options[k].size(); ++i) {
        trial[k] = i;
        Candidate c = evaluate(trial);
        ++evaluated;
        if (Better(c, best)) {
          best = c;
          choice = trial;
          moved = true;
        }
      }
    }
    if (!moved) break;
  }
  return MakePlan(p, best.m, delta_max, -1, evaluated);
}

bool SameDirection(const YarnPlan& a, const YarnPlan& b) {
  auto sign = [](int v) { return (v > 0) - (v < 0); };
  for (const auto& [gid, d] : a.deltas) {
    auto it = b.deltas.find(gid);
    if (it == b.deltas.end() || sign(it->second) != sign(d)) return false;
  }
  return a.deltas.size() == b.deltas.size();
}

namespace {
nlohmann::ordered_json OutcomeJson(const ClusterOutcome& o) {
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (const auto& [gid, g] : o.per_group)
    groups[gid] = {{"m", g.m}, {"x", g.x}, {"l", g.l}, {"w", g.w}};
  return {{"total_containers", o.total_containers},
          {"avg_latency", o.avg_latency},
          {"per_group", std::move(groups)}};
}
}  // namespace

nlohmann::ordered_json ToJson(const YarnPlan& plan) {
  nlohmann::ordered_json deltas = nlohmann::ordered_json::object();
  for (const auto& [gid, d] : plan.deltas) deltas[gid] = d;
  return {{"delta_max", plan.delta_max},
          {"candidate_count", plan.candidate_count},
          {"feasible_count", plan.feasible_count},
          {"baseline", OutcomeJson(plan.baseline)},
          {"proposed", OutcomeJson(plan.proposed)},
          {"deltas", std::move(deltas)}};
}

std::string ToMarkdown(const YarnPlan& plan) {
  std::ostringstream md;
  md << "| group | m' | m* | delta | CPU % | tasks/h | latency s |\n"
     << "|---|---|---|---|---|---|---|\n";
  for (const auto& [gid, g] : plan.proposed.per_group) {
    const auto& b = plan.baseline.per_group.at(gid);
    int d = plan.deltas.at(gid);
    md << "| " << gid << " | " << b.m << " | " << g.m << " | " << (d > 0 ? "+" : "") << d
       << " | " << FormatFixed(g.x, 2) << " | " << FormatFixed(g.l, 2) << " | "
       << FormatFixed(g.w, 4) << " |\n";
  }
  md << "\nBaseline avg latency W' = " << FormatFixed(plan.baseline.avg_latency, 6)
     << " s, proposed W = " << FormatFixed(plan.proposed.avg_latency, 6) << " s\n"
     << "Total running containers: " << FormatFixed(plan.baseline.total_containers, 0) << " -> "
     << FormatFixed(plan.proposed.total_containers, 0) << "\n";
  return md.str();
}

}  // namespace kea::yarn
