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

// Exact sampling densities and moments of the natural estimators
//
//   C_hat = (reach - u A_hat) / (3 sqrt(S^2 + v A_hat^2))
//
// for the unilateral family and for the asymmetric-tolerance family.
//
// Every estimator in scope reduces to the standardized form
//
//   X = (D - h sqrt(Y)) / (3 sqrt(K + v Y)),
//
// where K ~ chi^2_{n-1} (scaled by n/(n-1) for the S_{n-1} variant) is
// independent of Y = W^2 and W >= 0 has density
// alpha phi(alpha w - delta) + beta phi(beta w + delta). EstimatorKernel holds
// that form; densities are single integrals over Y, moments are double series
// in Gauss hypergeometric functions.

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "unicap/core_indices.hpp"
#include "unicap/quadrature.hpp"

namespace unicap {

/// How the estimator estimates sigma^2: sum of squares over n or over n - 1.
enum class Variant { DivN, DivNminus1 };

class EstimatorContext {
 public:
  static EstimatorContext unilateral(int n, ProcessParams process, ToleranceSpec spec,
                                     Variant variant = Variant::DivN);
  static EstimatorContext asymmetric(int n, ProcessParams process, BilateralSpec spec,
                                     Variant variant = Variant::DivN);

  int n() const { return n_; }
  Variant variant() const { return variant_; }
  const ProcessParams& process() const { return process_; }
  bool is_unilateral() const { return std::holds_alternative<ToleranceSpec>(spec_); }
  /// Throws DomainError when the context is asymmetric.
  const ToleranceSpec& tolerance() const;
  /// Throws DomainError when the context is unilateral.
  const BilateralSpec& bilateral() const;

  double delta() const;   // sqrt(n) (mu - T) / sigma
  double lambda() const;  // delta^2
  /// B_u or B_l for unilateral contexts, D* for asymmetric ones.
  double standardized_reach() const;
  /// D = sqrt(n) d / sigma (asymmetric contexts only).
  double standardized_half_width() const;

  /// (n-1)/n for DivNminus1, 1 for DivN.
  double variance_scale() const;

 private:
  EstimatorContext(int n, ProcessParams process, std::variant<ToleranceSpec, BilateralSpec> spec,
                   Variant variant);

  int n_;
  ProcessParams process_;
  std::variant<ToleranceSpec, BilateralSpec> spec_;
  Variant variant_;
};

/// Coefficients of f_Y(y) = (alpha phi(alpha sqrt(y) - delta)
///                          + beta phi(beta sqrt(y) + delta)) / (2 sqrt(y)).
struct YDensityParams {
  enum class Kind { Upper, Lower, Asymmetric };
  Kind kind = Kind::Upper;
  double delta = 0.0;
  double alpha = 1.0;
  double beta = 1.0;

  static YDensityParams upper(double delta, double k) { return {Kind::Upper, delta, 1.0, k}; }
  static YDensityParams lower(double delta, double k) { return {Kind::Lower, delta, k, 1.0}; }
  static YDensityParams asymmetric(double delta, double du, double dl, double d) {
    return {Kind::Asymmetric, delta, du / d, dl / d};
  }
};

/// Density of Y; 0 for y <= 0.
double y_density(double y, const YDensityParams& p);

/// Density of W = sqrt(Y); finite at w = 0.
double w_density(double w, const YDensityParams& p);

struct EstimatorKernel {
  int n = 0;
  double reach = 0.0;  // D: B_u, B_l or D*
  double shift = 0.0;  // h: u on the unilateral side, u d*/d for asymmetric
  double v = 0.0;
  YDensityParams y;
  double variance_scale = 1.0;  // w: K enters as K / w
};

EstimatorKernel make_kernel(const EstimatorContext& ctx, IndexParams ip);

/// Integrand J(x, t) of the density representation: the density is
/// int_0^1 J dt for x > 0 and -int_1^inf J dt for x < 0, with y = t K(x) and
/// K(x) = [D / (h + 3 x sqrt(v))]^2. For the S_{n-1} variant the chi-square
/// density is replaced by the density of K / w.
double density_integrand(const EstimatorKernel& kernel, double x, double t);

/// Density of the estimator at x. Points with |x| < kDensityExclusion are
/// reported as 0.
double kernel_density(const EstimatorKernel& kernel, double x);

inline constexpr double kDensityExclusion = 1e-6;

/// Closed-form density of the estimated C_pu (or C_pl): a scaled inverse-chi
/// transform. Zero for x <= 0.
double density_cpu_hat(double x, const EstimatorContext& ctx);

/// Raw moment E[C_hat_pu^r] for r < n - 1 (closed form).
double moments_cpu_hat(int r, const EstimatorContext& ctx);

struct MeanVariance {
  double mean;
  double variance;
};
MeanVariance mean_variance_cpu_hat(const EstimatorContext& ctx);

/// Bias-correction constants b_f (S_{n-1}) and c_f (S_n).
double bias_factor_b(int n);
double bias_factor_c(int n);

double density_unilateral(double x, const EstimatorContext& ctx, IndexParams ip);
double density_general_asymmetric(double x, const EstimatorContext& ctx, IndexParams ip);

struct SeriesMoment {
  double value = 0.0;
  int terms = 0;  // largest j summed over the inner series
};

/// r-th raw moment of the standardized form by the double hypergeometric
/// series. Throws DomainError for r >= n - 1 and ConvergenceError when the
/// inner series fails to settle within 20000 terms.
SeriesMoment series_moment(const EstimatorKernel& kernel, int r);

SeriesMoment moment_unilateral(int r, const EstimatorContext& ctx, IndexParams ip);
SeriesMoment moment_asymmetric(int r, const EstimatorContext& ctx, IndexParams ip);

struct RawMoments {
  double mean;
  double second_moment;
};

/// Explicit first and second moments of the estimated C_pku (C_pkl on the
/// lower side), either variant.
RawMoments closed_form_cpku_moments(const EstimatorContext& ctx);

/// Density of the estimator evaluated on a grid.
struct DensityCurve {
  struct Point {
    double x;
    double f;
  };
  std::vector<Point> points;
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  double exclusion = kDensityExclusion;
};

DensityCurve density_curve(const EstimatorContext& ctx, IndexParams ip, double lo, double hi,
                           int points);

/// Lower end of the estimator's support (-inf when unbounded).
double support_lower_bound(const EstimatorKernel& kernel);

/// Writes "# key=value" header lines followed by an "x,f" table.
void write_density_csv(std::ostream& out, const DensityCurve& curve,
                       const std::string& header_comment);

/// Integral of the density over [a, b] (either end may be infinite); used to
/// turn densities into CDF differences.
quad::Result integrate_density(const EstimatorKernel& kernel, double a, double b,
                               const quad::Control& ctl = {});

}  // namespace unicap
