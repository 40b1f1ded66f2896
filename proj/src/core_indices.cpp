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

#include "unicap/core_indices.hpp"

#include <algorithm>
#include <cmath>

#include "unicap/error.hpp"

namespace unicap {
namespace {

double apply(Clamp clamp, double value) {
  return clamp == Clamp::ZeroFloor ? std::max(0.0, value) : value;
}

}  // namespace

void ToleranceSpec::validate() const {
  if (!std::isfinite(target) || !std::isfinite(limit) || !std::isfinite(k)) {
    throw DomainError("tolerance spec: non-finite field");
  }
  if (side == Side::Upper && !(limit > target)) {
    throw DomainError("tolerance spec: upper limit must exceed the target");
  }
  if (side == Side::Lower && !(limit < target)) {
    throw DomainError("tolerance spec: lower limit must be below the target");
  }
  if (!(k >= 1.0)) throw DomainError("tolerance spec: k must be >= 1");
}

void ProcessParams::validate() const {
  if (!std::isfinite(mu)) throw DomainError("process: non-finite mean");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("process: sigma must be positive");
  }
}

void BilateralSpec::validate() const {
  if (!(lower < target && target < upper)) {
    throw DomainError("bilateral spec: requires L < T < U");
  }
}

double BilateralSpec::min_reach() const { return std::min(upper_reach(), lower_reach()); }

void IndexParams::validate() const {
  if (!(u >= 0.0) || !(v >= 0.0) || !std::isfinite(u) || !std::isfinite(v)) {
    throw DomainError("index params: u and v must be finite and non-negative");
  }
}

ClassicalIndices classical_indices(const ProcessParams& p, const BilateralSpec& b,
                                   Clamp clamp) {
  p.validate();
  if (!(b.lower < b.upper)) throw DomainError("classical indices: requires L < U");
  const double width = b.upper - b.lower;
  const double nearest = std::min(b.upper - p.mu, p.mu - b.lower);
  const double tau = std::hypot(p.sigma, p.mu - b.target);
  return {apply(clamp, width / (6.0 * p.sigma)), apply(clamp, nearest / (3.0 * p.sigma)),
          apply(clamp, width / (6.0 * tau)), apply(clamp, nearest / (3.0 * tau))};
}

double penalized_deviation(double location, const ToleranceSpec& t) {
  const double off = location - t.target;
  // At location == target both branches are zero.
  return t.side == Side::Upper ? std::max(off, -off / t.k) : std::max(off / t.k, -off);
}

double unilateral_index(const ProcessParams& p, const ToleranceSpec& t, IndexParams ip,
                        Clamp clamp) {
  p.validate();
  t.validate();
  ip.validate();
  const double a = penalized_deviation(p.mu, t);
  const double value =
      (t.reach() - ip.u * a) / (3.0 * std::sqrt(p.sigma * p.sigma + ip.v * a * a));
  return apply(clamp, value);
}

IndexReport unilateral_report(const ProcessParams& p, const ToleranceSpec& t,
                              Clamp clamp) {
  p.validate();
  t.validate();
  IndexReport r;
  r.a_star = penalized_deviation(p.mu, t);
  r.alpha = r.a_star / t.reach();
  r.delta = r.a_star / p.sigma;
  r.cpu_or_cpl = apply(clamp, t.reach() / (3.0 * p.sigma));
  r.cpk_side = unilateral_index(p, t, index_params::kCpk, clamp);
  r.cpm_side = unilateral_index(p, t, index_params::kCpm, clamp);
  r.cpmk_side = unilateral_index(p, t, index_params::kCpmk, clamp);
  return r;
}

double legacy_index(const ProcessParams& p, const ToleranceSpec& t, LegacyFamily family,
                    const LegacyOptions& options) {
  p.validate();
  t.validate();
  const bool parametric =
      family == LegacyFamily::VannmanCpa || family == LegacyFamily::VannmanCpv;
  if (parametric && !options.params) {
    throw DomainError("legacy index: Vannman families need (u, v)");
  }
  if (!parametric && options.params) {
    throw DomainError("legacy index: this family takes no (u, v)");
  }
  const bool kane = family == LegacyFamily::KaneCpu || family == LegacyFamily::KaneStar;
  const Clamp clamp = options.clamp.value_or(kane ? Clamp::ZeroFloor : Clamp::Raw);

  const bool upper = t.side == Side::Upper;
  // Distance from mean to the limit and from target to the limit.
  const double mean_reach = upper ? t.limit - p.mu : p.mu - t.limit;
  const double reach = t.reach();
  const double off = std::abs(p.mu - t.target);
  const double s2 = p.sigma * p.sigma;

  double value = 0.0;
  switch (family) {
    case LegacyFamily::KaneCpu:
      value = mean_reach / (3.0 * p.sigma);
      break;
    case LegacyFamily::KaneStar:
      value = (reach - off) / (3.0 * p.sigma);
      break;
    case LegacyFamily::ChanCpmStar:
      value = reach / (3.0 * std::sqrt(s2 + off * off));
      break;
    case LegacyFamily::VannmanCpmkSide:
      value = mean_reach / (3.0 * std::sqrt(s2 + off * off));
      break;
    case LegacyFamily::VannmanCpa:
    case LegacyFamily::VannmanCpv: {
      const IndexParams ip = *options.params;
      ip.validate();
      const double base = family == LegacyFamily::VannmanCpa ? mean_reach : reach;
      value = (base - ip.u * off) / (3.0 * std::sqrt(s2 + ip.v * off * off));
      break;
    }
  }
  return apply(clamp, value);
}

double chen_pearn_index(const ProcessParams& p, const BilateralSpec& b, IndexParams ip) {
  p.validate();
  b.validate();
  ip.validate();
  const double du = b.upper_reach();
  const double dl = b.lower_reach();
  const double ds = b.min_reach();
  const double a_star = std::max(ds * (p.mu - b.target) / du, ds * (b.target - p.mu) / dl);
  const double a = b.half_width() * a_star / ds;
  return (ds - ip.u * a_star) / (3.0 * std::sqrt(p.sigma * p.sigma + ip.v * a * a));
}

BilateralSpec embed_as_bilateral(const ToleranceSpec& t) {
  t.validate();
  const double reach = t.reach();
  if (t.side == Side::Upper) return {t.target - t.k * reach, t.limit, t.target};
  return {t.limit, t.target + t.k * reach, t.target};
}

double mean_position_from_ratio(double h, const ToleranceSpec& t) {
  t.validate();
  if (!(h >= 0.0 && h <= 1.0)) {
    throw DomainError("mean_position_from_ratio: h must lie in [0, 1]");
  }
  return t.side == Side::Upper ? t.limit - h * t.reach() : t.limit + h * t.reach();
}

}  // namespace unicap
