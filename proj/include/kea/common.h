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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kea {

/// Raised when inputs violate a documented precondition (bad config, malformed
/// file, out-of-range argument). The CLI maps it to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a well-formed computation cannot complete (degenerate data,
/// empty feasible set, I/O failure). The CLI maps it to exit status 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent sub-seeds.
uint64_t Mix64(uint64_t x);

/// Deterministic child stream for (seed, index). Results never depend on the
/// order in which streams are created, which keeps parallel work reproducible.
Rng SubStream(uint64_t seed, uint64_t index);
Rng SubStream(uint64_t seed, std::string_view key);

/// Worker count: explicit override if set, else KEA_TUNER_THREADS, else
/// hardware concurrency. 0 in either place means auto.
std::size_t WorkerCount();
void SetWorkerCount(std::size_t n);

/// Runs fn(i) for i in [0, n) across WorkerCount() threads. fn must only write
/// to slots owned by i.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Lower-interpolation empirical quantile: sorted[floor(level * (n - 1))].
/// Copies and sorts; level must be within [0, 1].
double LowerQuantile(std::vector<double> values, double level);

double Median(std::vector<double> values);

/// Shortest round-trip decimal representation.
std::string FormatDouble(double v);
/// Fixed-point text for human-facing tables.
std::string FormatFixed(double v, int precision);

/// Strict full-string parse; throws ValidationError with `what` on failure.
double ParseDouble(std::string_view text, std::string_view what);
int64_t ParseInt(std::string_view text, std::string_view what);

std::vector<std::string_view> SplitCsvLine(std::string_view line);

void RequireFinite(std::span<const double> values, std::string_view what);

}  // namespace kea
