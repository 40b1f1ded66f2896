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

// Percentile-based unilateral indices for non-normal processes, and Shore's
// two-branch quantile approximation used to estimate the extreme percentiles.

#include <cstddef>
#include <span>

#include "unicap/core_indices.hpp"

namespace unicap {

inline constexpr double kLowerTailProbability = 0.00135;
inline constexpr double kUpperTailProbability = 0.99865;

/// Median and the 0.135% / 99.865% percentiles of a process.
struct PercentileSummary {
  double median = 0.0;
  double lower_pct = 0.0;  // L_p
  double upper_pct = 0.0;  // U_p

  void validate() const;
};

/// C_pu(u,v) / C_pl(u,v) with the mean replaced by the median and 3 sigma by
/// U_p - M (upper side) or M - L_p (lower side).
double nonnormal_unilateral_index(const PercentileSummary& ps, const ToleranceSpec& t,
                                  IndexParams ip, Clamp clamp = Clamp::Raw);

/// All four named percentile indices with alpha and delta redefined from the
/// median and the relevant percentile spread.
IndexReport nonnormal_report(const PercentileSummary& ps, const ToleranceSpec& t,
                             Clamp clamp = Clamp::Raw);

/// Coefficients of Q_p = A1 (p/(1-p))^B1 for p < 1/2 and
/// Q_p = A2 ln(p/(1-p)) + B2 for p >= 1/2.
struct ShoreFit {
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
  double median = 0.0;
  std::size_t n = 0;

  bool degenerate() const { return !(b1 > 0.0 && a2 > 0.0); }
};

/// Fits the Shore approximation by matching the complete moments of
/// Z = ln Y on the lower half of the sample and the partial moments of Y on
/// the upper half. The halves are the n/2 smallest and n/2 largest order
/// statistics (an odd sample splits its middle observation evenly), each
/// weighted 1/n so that every half carries probability mass one half.
/// Requires n >= 4 and strictly positive observations.
ShoreFit shore_fit(std::span<const double> sample);

double shore_quantile(const ShoreFit& fit, double p);

enum class PercentileMethod { Shore, Empirical };

/// Median from order statistics; L_p and U_p from the Shore fit or from
/// linearly interpolated order statistics.
PercentileSummary summarize_sample(std::span<const double> sample, PercentileMethod method);

/// Median of the sample (mean of the two central order statistics when n is
/// even).
double sample_median(std::span<const double> sample);

/// Quantile of an ascending-sorted sample by linear interpolation between
/// order statistics at position (n - 1) p.
double empirical_quantile(std::span<const double> sorted, double p);

}  // namespace unicap
