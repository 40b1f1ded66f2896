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

#include "unicap/nonnormal_indices.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "unicap/error.hpp"

namespace unicap {
namespace {

// Rounded constants of the approximation: ln 2, 1/sqrt(pi^2/12 - ln^2 2) and
// pi^2/6 - 2 ln^2 2.
constexpr double kLn2 = 0.6931;
constexpr double kLowerScale = 1.7099;
constexpr double kUpperScale = 0.6840;

// Radicands below this fraction of their leading term count as zero.
constexpr double kDegenerateRelTol = 1e-12;

std::vector<double> sorted_copy(std::span<const double> sample) {
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  return s;
}

double median_of_sorted(std::span<const double> s) {
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double spread_for(const PercentileSummary& ps, Side side) {
  return side == Side::Upper ? ps.upper_pct - ps.median : ps.median - ps.lower_pct;
}

}  // namespace

void PercentileSummary::validate() const {
  if (!(lower_pct < median && median < upper_pct)) {
    throw DegenerateError("percentile summary: requires L_p < M < U_p");
  }
}

double nonnormal_unilateral_index(const PercentileSummary& ps, const ToleranceSpec& t,
                                  IndexParams ip, Clamp clamp) {
  t.validate();
  ip.validate();
  const double spread = spread_for(ps, t.side);
  if (!(spread > 0.0)) {
    throw DegenerateError(t.side == Side::Upper
                              ? "non-normal index: U_p must exceed the median"
                              : "non-normal index: median must exceed L_p");
  }
  const double a = penalized_deviation(ps.median, t);
  const double scale = spread / 3.0;
  const double value =
      (t.reach() - ip.u * a) / (3.0 * std::sqrt(scale * scale + ip.v * a * a));
  return clamp == Clamp::ZeroFloor ? std::max(0.0, value) : value;
}

IndexReport nonnormal_report(const PercentileSummary& ps, const ToleranceSpec& t,
                             Clamp clamp) {
  IndexReport r;
  r.cpu_or_cpl = nonnormal_unilateral_index(ps, t, index_params::kCp, clamp);
  r.cpk_side = nonnormal_unilateral_index(ps, t, index_params::kCpk, clamp);
  r.cpm_side = nonnormal_unilateral_index(ps, t, index_params::kCpm, clamp);
  r.cpmk_side = nonnormal_unilateral_index(ps, t, index_params::kCpmk, clamp);
  r.a_star = penalized_deviation(ps.median, t);
  r.alpha = r.a_star / t.reach();
  r.delta = 3.0 * t.reach() * r.alpha / spread_for(ps, t.side);
  return r;
}

ShoreFit shore_fit(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 4) throw DomainError("shore_fit: needs at least 4 observations");
  for (double y : sample) {
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw DomainError("shore_fit: observations must be finite and positive");
    }
  }
  const auto s = sorted_copy(sample);
  const std::size_t half = n / 2;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Lower half: complete moments of Z = ln Y (Z = 0 on the upper half).
  double z1 = 0.0;
  double z2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const double z = std::log(s[i]);
    z1 += z;
    z2 += z * z;
  }
  // Upper half: partial moments of Y.
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = n - half; i < n; ++i) {
    m1 += s[i];
    m2 += s[i] * s[i];
  }
  if (n % 2 == 1) {
    const double mid = s[half];
    const double z = std::log(mid);
    z1 += 0.5 * z;
    z2 += 0.5 * z * z;
    m1 += 0.5 * mid;
    m2 += 0.5 * mid * mid;
  }
  z1 *= inv_n;
  z2 *= inv_n;
  m1 *= inv_n;
  m2 *= inv_n;

  const double lower_rad = 0.5 * z2 - z1 * z1;
  if (!(lower_rad > kDegenerateRelTol * 0.5 * z2)) {
    throw DegenerateError("shore_fit: lower half has no log-dispersion");
  }
  const double upper_rad = m2 - 2.0 * m1 * m1;
  if (!(upper_rad > kDegenerateRelTol * m2)) {
    throw DegenerateError("shore_fit: upper half has no dispersion");
  }

  ShoreFit fit;
  fit.n = n;
  fit.median = median_of_sorted(s);
  fit.b1 = kLowerScale * std::sqrt(lower_rad);
  fit.a1 = std::exp(2.0 * (z1 + kLn2 * fit.b1));
  // Matching the second partial moment gives A2^2 (not A2) on the left.
  fit.a2 = std::sqrt(upper_rad / kUpperScale);
  fit.b2 = 2.0 * (m1 - kLn2 * fit.a2);
  return fit;
}

double shore_quantile(const ShoreFit& fit, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("shore_quantile: p must lie in (0, 1)");
  const double odds = p / (1.0 - p);
  if (p < 0.5) return fit.a1 * std::pow(odds, fit.b1);
  return fit.a2 * std::log(odds) + fit.b2;
}

double sample_median(std::span<const double> sample) {
  if (sample.empty()) throw DomainError("sample_median: empty sample");
  return median_of_sorted(sorted_copy(sample));
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("empirical_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("empirical_quantile: p outside [0, 1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PercentileSummary summarize_sample(std::span<const double> sample, PercentileMethod method) {
  if (sample.size() < 4) throw DomainError("summarize_sample: needs at least 4 observations");
  PercentileSummary ps;
  if (method == PercentileMethod::Shore) {
    const ShoreFit fit = shore_fit(sample);
    ps.median = fit.median;
    ps.lower_pct = shore_quantile(fit, kLowerTailProbability);
    ps.upper_pct = shore_quantile(fit, kUpperTailProbability);
    return ps;
  }
  const auto s = sorted_copy(sample);
  ps.median = median_of_sorted(s);
  ps.lower_pct = empirical_quantile(s, kLowerTailProbability);
  ps.upper_pct = empirical_quantile(s, kUpperTailProbability);
  return ps;
}

}  // namespace unicap
