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

#include "unicap/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "unicap/error.hpp"

namespace unicap {
namespace {

constexpr double kDirectSeriesLimit = 0.95;

bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::nearbyint(x);
}

// log|Gamma(x)| together with the sign of Gamma(x). Poles report sign 0.
struct SignedLogGamma {
  double log_abs;
  int sign;
};

SignedLogGamma signed_lgamma(double x) {
  if (is_nonpositive_integer(x)) return {std::numeric_limits<double>::infinity(), 0};
  const double lg = std::lgamma(x);
  if (x > 0.0) return {lg, 1};
  const bool floor_even = std::fmod(std::floor(x), 2.0) == 0.0;
  return {lg, floor_even ? 1 : -1};
}

// Gamma(n1) Gamma(n2) / (Gamma(d1) Gamma(d2)); a pole in the denominator
// yields zero.
double gamma_quotient(double n1, double n2, double d1, double d2) {
  const auto a = signed_lgamma(n1);
  const auto b = signed_lgamma(n2);
  const auto c = signed_lgamma(d1);
  const auto d = signed_lgamma(d2);
  if (c.sign == 0 || d.sign == 0) return 0.0;
  if (a.sign == 0 || b.sign == 0) {
    throw DomainError("gauss_2f1: gamma pole in connection coefficient");
  }
  const int sign = a.sign * b.sign * c.sign * d.sign;
  return sign * std::exp(a.log_abs + b.log_abs - c.log_abs - d.log_abs);
}

double direct_series(double a, double b, double c, double z,
                     const SeriesControl& ctl) {
  double term = 1.0;
  double sum = 1.0;
  int small_run = 0;
  for (int k = 0; k < ctl.max_terms; ++k) {
    const double ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    term *= ratio;
    sum += term;
    if (term == 0.0) return sum;
    // Geometric tail bound once the ratio has settled below one.
    const double r = std::abs(ratio);
    const double tail = r < 1.0 ? std::abs(term) * r / (1.0 - r)
                                : std::numeric_limits<double>::infinity();
    if (tail <= ctl.rel_tol * std::abs(sum)) {
      if (++small_run >= 2) return sum;
    } else {
      small_run = 0;
    }
  }
  throw ConvergenceError("gauss_2f1: series did not converge within " +
                         std::to_string(ctl.max_terms) + " terms (z = " +
                         std::to_string(z) + ")");
}

// Non-integer c - a - b; both series run in 1 - z.
double connection_general(double a, double b, double c, double z,
                          const SeriesControl& ctl) {
  const double w = 1.0 - z;
  const double s = c - a - b;
  double result = 0.0;
  const double g1 = gamma_quotient(c, s, c - a, c - b);
  if (g1 != 0.0) result += g1 * direct_series(a, b, 1.0 - s, w, ctl);
  const double g2 = gamma_quotient(c, -s, a, b);
  if (g2 != 0.0) {
    result += std::pow(w, s) * g2 * direct_series(c - a, c - b, s + 1.0, w, ctl);
  }
  return result;
}

// c = a + b + m with integer m >= 0 (logarithmic case).
double connection_integer(double a, double b, int m, double z,
                          const SeriesControl& ctl) {
  const double w = 1.0 - z;
  const double log_w = std::log(w);

  double finite_part = 0.0;
  if (m > 0) {
    const double pref = gamma_quotient(m, a + b + m, a + m, b + m);
    double term = 1.0;
    for (int k = 0; k < m; ++k) {
      finite_part += term;
      term *= (a + k) * (b + k) / ((k + 1.0) * (1.0 - m + k)) * w;
    }
    finite_part *= pref;
  }

  // Coefficient of the logarithmic series; Gamma(a + b + m) / (Gamma(a) Gamma(b)).
  const auto num = signed_lgamma(a + b + m);
  const auto ga = signed_lgamma(a);
  const auto gb = signed_lgamma(b);
  if (ga.sign == 0 || gb.sign == 0) return finite_part;
  const double log_pref = num.log_abs - ga.log_abs - gb.log_abs - std::lgamma(m + 1.0);
  const double pref = num.sign * ga.sign * gb.sign * std::exp(log_pref);

  // term_k carries (a+m)_k (b+m)_k m! / (k! (k+m)!) w^k.
  double term = 1.0;
  double sum = 0.0;
  int small_run = 0;
  for (int k = 0; k < ctl.max_terms; ++k) {
    const double bracket = log_w - digamma(k + 1.0) - digamma(k + m + 1.0) +
                           digamma(a + k + m) + digamma(b + k + m);
    const double contrib = term * bracket;
    sum += contrib;
    if (std::abs(contrib) <= ctl.rel_tol * std::abs(sum) || term == 0.0) {
      if (++small_run >= 2) break;
    } else {
      small_run = 0;
    }
    term *= (a + m + k) * (b + m + k) / ((k + 1.0) * (k + m + 1.0)) * w;
    if (k + 1 == ctl.max_terms) {
      throw ConvergenceError("gauss_2f1: logarithmic series did not converge");
    }
  }
  const double sign_m = (m % 2 == 0) ? 1.0 : -1.0;  // (z - 1)^m = (-1)^m w^m
  return finite_part - sign_m * std::pow(w, m) * pref * sum;
}

double near_one(double a, double b, double c, double z,
                const SeriesControl& ctl) {
  const double s = c - a - b;
  const double rounded = std::nearbyint(s);
  if (std::abs(s - rounded) > 1e-12) return connection_general(a, b, c, z, ctl);
  const int m = static_cast<int>(rounded);
  if (m >= 0) return connection_integer(a, b, m, z, ctl);
  // Euler's transformation moves to c - a' - b' = -m > 0.
  return std::pow(1.0 - z, s) * connection_integer(c - a, c - b, -m, z, ctl);
}

}  // namespace

double gauss_2f1(double a, double b, double c, double z,
                 const SeriesControl& ctl) {
  if (!(ctl.rel_tol > 0.0) || ctl.max_terms < 1) {
    throw DomainError("gauss_2f1: invalid series control");
  }
  if (is_nonpositive_integer(c)) throw DomainError("gauss_2f1: c is a pole");
  if (!std::isfinite(z) || z > 1.0) {
    throw DomainError("gauss_2f1: requires z <= 1, got " + std::to_string(z));
  }
  if (a == 0.0 || b == 0.0 || z == 0.0) return 1.0;

  // Terminating polynomial: the direct sum is exact for any z.
  if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) {
    return direct_series(a, b, c, z, ctl);
  }

  if (z == 1.0) {
    if (c - a - b <= 0.0) {
      throw DomainError("gauss_2f1: divergent at z = 1 (c - a - b <= 0)");
    }
    return gamma_quotient(c, c - a - b, c - a, c - b);
  }
  if (z < 0.0) {
    // Pfaff: 2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)).
    const double zp = z / (z - 1.0);
    return std::pow(1.0 - z, -a) * gauss_2f1(a, c - b, c, zp, ctl);
  }
  if (z <= kDirectSeriesLimit) return direct_series(a, b, c, z, ctl);
  return near_one(a, b, c, z, ctl);
}

double ln_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive");
  return std::lgamma(x);
}

double gamma_ratio(double num, double den) {
  if (!(num > 0.0) || !(den > 0.0)) {
    throw DomainError("gamma_ratio: arguments must be positive");
  }
  return std::exp(std::lgamma(num) - std::lgamma(den));
}

double digamma(double x) {
  if (is_nonpositive_integer(x)) throw DomainError("digamma: pole");
  if (x < 0.0) {
    // Reflection.
    return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * x);
  }
  double shift = 0.0;
  while (x < 8.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series with Bernoulli numbers B2..B12.
  const double series =
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 -
      inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie in (0, 1)");
  }
  // Acklam's rational approximation, then Halley refinement against erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    // Work on the smaller tail so the residual keeps relative precision.
    const double e = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double chi2_pdf(double x, double dof) {
  if (!(dof >= 1.0)) throw DomainError("chi2_pdf: dof must be >= 1");
  if (x < 0.0) return 0.0;
  const double half = 0.5 * dof;
  if (x == 0.0) {
    if (dof < 2.0) return std::numeric_limits<double>::infinity();
    return dof == 2.0 ? 0.5 : 0.0;
  }
  return std::exp((half - 1.0) * std::log(x) - 0.5 * x - half * std::numbers::ln2 -
                  std::lgamma(half));
}

}  // namespace unicap
