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

#include "kea/common.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace kea {

namespace {
std::atomic<std::size_t> g_worker_override{0};
}  // namespace

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng SubStream(uint64_t seed, uint64_t index) {
  std::seed_seq seq{static_cast<uint32_t>(Mix64(seed) >> 32),
                    static_cast<uint32_t>(Mix64(seed)),
                    static_cast<uint32_t>(Mix64(seed ^ Mix64(index)) >> 32),
                    static_cast<uint32_t>(Mix64(seed ^ Mix64(index)))};
  return Rng(seq);
}

Rng SubStream(uint64_t seed, std::string_view key) {
  // FNV-1a; std::hash is not stable across implementations.
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return SubStream(seed, h);
}

std::size_t WorkerCount() {
  if (auto n = g_worker_override.load(); n > 0) return n;
  if (const char* env = std::getenv("KEA_TUNER_THREADS"); env && *env) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void SetWorkerCount(std::size_t n) { g_worker_override.store(n); }

void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min(WorkerCount(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double LowerQuantile(std::vector<double> values, double level) {
  if (values.empty()) throw ValidationError("quantile of empty sample");
  if (!(level >= 0.0 && level <= 1.0))
    throw ValidationError("quantile level must be within [0, 1]");
  auto idx = static_cast<std::size_t>(
      std::floor(level * static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + idx, values.end());
  return values[idx];
}

double Median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of empty sample");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string FormatDouble(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FormatFixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-')
    s.erase(0, 1);
  return s;
}

double ParseDouble(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() ||
      res.ptr != text.data() + text.size() || !std::isfinite(v))
    throw ValidationError(std::string(what) + ": not a finite number '" +
                          std::string(text) + "'");
  return v;
}

int64_t ParseInt(std::string_view text, std::string_view what) {
  int64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() ||
      res.ptr != text.data() + text.size())
    throw ValidationError(std::string(what) + ": not an integer '" +
                          std::string(text) + "'");
  return v;
}

std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

void RequireFinite(std::span<const double> values, std::string_view what) {
  for (double v : values)
    if (!std::isfinite(v))
      throw ValidationError(std::string(what) + " contains non-finite values");
}

}  // namespace kea
