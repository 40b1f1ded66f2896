// Copyright 2026 The unicap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Seeded simulation of the natural estimators, used as an independent check
// of the analytic densities and moments.
//
// Replication i draws its n normal variates from its own counter-based
// stream keyed by (seed, i), and partial sums are combined in a fixed order,
// so results are bit-identical for any thread count.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "unicap/estimator_analytics.hpp"

namespace unicap {

struct HistogramSpec {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 50;
};

struct SimConfig {
  std::size_t replications = 100000;
  std::uint64_t seed = 0;
  EstimatorContext ctx;
  IndexParams ip;
  std::optional<HistogramSpec> histogram;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct HistogramBin {
  double lo;
  double hi;
  double mass;
};

struct SimResult {
  std::size_t replications = 0;
  double empirical_mean = 0.0;
  double empirical_second_moment = 0.0;
  double se_mean = 0.0;
  double se_second_moment = 0.0;
  /// Regular bins over [lo, hi] plus an underflow and an overflow bin with
  /// infinite outer edges, so the masses sum to one.
  std::vector<HistogramBin> histogram;
};

/// One estimator evaluated on shared samples.
struct EstimatorTarget {
  EstimatorContext ctx;
  IndexParams ip;
  std::optional<HistogramSpec> histogram;
};

SimResult simulate_estimator(const SimConfig& cfg);

/// Simulates several estimators on the same draws. All targets must share
/// n, mu and sigma; target i of replication r sees exactly the sample that
/// simulate_estimator would draw for replication r with the same seed.
std::vector<SimResult> simulate_batch(std::span<const EstimatorTarget> targets,
                                      std::size_t replications, std::uint64_t seed,
                                      unsigned threads = 0);

/// Natural estimate from a sample mean and the variance estimate that the
/// context's variant prescribes.
double estimate_from_moments(double mean, double variance, const EstimatorContext& ctx,
                             IndexParams ip);

/// Natural estimate from raw observations (uses ctx's spec and variant only).
double estimate_from_sample(std::span<const double> sample, const EstimatorContext& ctx,
                            IndexParams ip);

struct Verdict {
  double z_mean = 0.0;
  double z_second_moment = 0.0;
  bool pass = false;
  std::optional<double> ks_distance;
};

/// z-scores of the analytic moments against the simulation; passes when both
/// |z| <= 3. When `analytic_cdf` is given, also reports the largest gap
/// between it and the histogram CDF over the histogram edges.
Verdict compare_to_analytics(const SimResult& res, double analytic_mean,
                             double analytic_second,
                             const std::function<double(double)>& analytic_cdf = {});

/// Uniform on (0, 1) from a counter-based stream; exposed for tests.
double stream_uniform(std::uint64_t seed, std::uint64_t replication, std::uint64_t index);

void to_json(nlohmann::json& j, const SimResult& r);
void to_json(nlohmann::json& j, const Verdict& v);

}  // namespace unicap
