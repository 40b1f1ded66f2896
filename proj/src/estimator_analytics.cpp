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

#include "unicap/estimator_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "unicap/error.hpp"
#include "unicap/special_functions.hpp"

namespace unicap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr int kMaxSeriesTerms = 20000;
constexpr double kSeriesRelTol = 1e-14;
constexpr int kSeriesSettleRun = 5;
constexpr double kSeriesMinExtraTerms = 50.0;

// Inner (per-x) quadrature of the density representation.
constexpr quad::Control kInnerControl{1e-14, 1e-10, 2000};

// Below this |delta| the 1/(2 delta) term of the explicit second moment is
// replaced by its limit.
constexpr double kDeltaLimit = 1e-8;

// Chi-square argument beyond which the density is negligible (< 1e-19 of its
// peak) for every dof used here.
double chi2_cutoff(double dof) { return dof + 12.0 * std::sqrt(2.0 * dof) + 60.0; }

// W is negligible beyond this point.
double w_cutoff(const YDensityParams& p) {
  const double up = (p.delta + 40.0) / p.alpha;
  const double down = (40.0 - p.delta) / p.beta;
  return std::max({up, down, 0.0});
}

double binomial(int r, int i) {
  return std::exp(std::lgamma(r + 1.0) - std::lgamma(i + 1.0) - std::lgamma(r - i + 1.0));
}

// Density of K / w where K ~ chi^2_{n-1}.
double scaled_chi2_pdf(double q, const EstimatorKernel& k) {
  if (q <= 0.0) return 0.0;
  const double w = k.variance_scale;
  return w * chi2_pdf(w * q, k.n - 1.0);
}

// Pieces shared by the integrand evaluations at a fixed x.
struct XFrame {
  const EstimatorKernel* kernel;
  double x;
  double kx;       // K(x)
  double sqrt_kx;  // sqrt(K(x))

  // f_K argument at t = sigma^2.
  double chi_argument(double sigma) const {
    const double s = sigma * sqrt_kx;
    const double a = kernel->reach - kernel->shift * s;
    const double r = a / (3.0 * x);
    return r * r - kernel->v * s * s;
  }

  // J(x, sigma^2) * 2 sigma: the integrand after t = sigma^2, which removes
  // the 1 / sqrt(t) endpoint singularity of f_Y.
  double integrand(double sigma) const {
    const double s = sigma * sqrt_kx;
    const double a = kernel->reach - kernel->shift * s;
    const double r = a / (3.0 * x);
    const double q = r * r - kernel->v * s * s;
    const double fk = scaled_chi2_pdf(q, *kernel);
    if (fk == 0.0) return 0.0;
    return fk * w_density(s, kernel->y) * (2.0 * sqrt_kx / x) * r * r;
  }
};

// Solve chi_argument(sigma) = target on a bracket where it is monotone.
double bisect(const XFrame& frame, double lo, double hi, double target, bool decreasing) {
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double q = frame.chi_argument(mid);
    const bool above = q > target;
    if (above == decreasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Inverse-chi transform used when the estimator does not depend on Y.
double pure_scale_density(const EstimatorKernel& k, double x) {
  if (x <= 0.0) return 0.0;
  const double r = k.reach / (3.0 * x);
  return scaled_chi2_pdf(r * r, k) * 2.0 * r * r / x;
}

double general_density(const EstimatorKernel& k, double x) {
  const double sv = std::sqrt(k.v);
  const double denom = k.shift + 3.0 * x * sv;
  if (x < 0.0 && (k.shift == 0.0 || denom <= 0.0)) return 0.0;

  XFrame frame{&k, x, 0.0, 0.0};
  frame.sqrt_kx = k.reach / denom;
  frame.kx = frame.sqrt_kx * frame.sqrt_kx;

  const double q_cut = chi2_cutoff(k.n - 1.0) / k.variance_scale;
  const double sigma_w = w_cutoff(k.y) / frame.sqrt_kx;

  double lo;
  double hi;
  if (x > 0.0) {
    hi = 1.0;
    lo = frame.chi_argument(0.0) <= q_cut ? 0.0 : bisect(frame, 0.0, 1.0, q_cut, true);
    if (lo >= hi) return 0.0;
  } else {
    lo = 1.0;
    hi = 2.0;
    while (frame.chi_argument(hi) < q_cut && hi < sigma_w) hi *= 2.0;
    hi = std::min(hi, std::max(sigma_w, 1.0));
    if (frame.chi_argument(hi) > q_cut) hi = bisect(frame, 1.0, hi, q_cut, false);
    if (hi <= lo) return 0.0;
  }

  // Split around the peaks of the W density so they cannot be stepped over.
  std::vector<double> breaks;
  auto add_peak = [&](double center, double width) {
    if (center <= 0.0) return;
    for (double m : {-8.0, -2.0, 0.0, 2.0, 8.0}) {
      breaks.push_back((center + m * width) / frame.sqrt_kx);
    }
  };
  add_peak(k.y.delta / k.y.alpha, 1.0 / k.y.alpha);
  add_peak(-k.y.delta / k.y.beta, 1.0 / k.y.beta);
  for (int i = 1; i < 4; ++i) breaks.push_back(lo + (hi - lo) * i / 4.0);

  auto f = [&](double sigma) { return frame.integrand(sigma); };
  const auto res = quad::integrate(f, lo, hi, breaks, kInnerControl);
  // J carries the sign of x; the negative branch enters with a minus.
  return std::max(0.0, x > 0.0 ? res.value : -res.value);
}

double w_mode(const YDensityParams& p) {
  return std::max({p.delta / p.alpha, -p.delta / p.beta, 0.0});
}

}  // namespace

// ---------------------------------------------------------------------------
// EstimatorContext

EstimatorContext::EstimatorContext(int n, ProcessParams process,
                                   std::variant<ToleranceSpec, BilateralSpec> spec,
                                   Variant variant)
    : n_(n), process_(process), spec_(spec), variant_(variant) {
  if (n < 4) throw DomainError("estimator context: sample size must be >= 4");
  process_.validate();
}

EstimatorContext EstimatorContext::unilateral(int n, ProcessParams process, ToleranceSpec spec,
                                              Variant variant) {
  spec.validate();
  return EstimatorContext(n, process, spec, variant);
}

EstimatorContext EstimatorContext::asymmetric(int n, ProcessParams process, BilateralSpec spec,
                                              Variant variant) {
  spec.validate();
  return EstimatorContext(n, process, spec, variant);
}

const ToleranceSpec& EstimatorContext::tolerance() const {
  if (!is_unilateral()) throw DomainError("estimator context: not a unilateral spec");
  return std::get<ToleranceSpec>(spec_);
}

const BilateralSpec& EstimatorContext::bilateral() const {
  if (is_unilateral()) throw DomainError("estimator context: not a bilateral spec");
  return std::get<BilateralSpec>(spec_);
}

double EstimatorContext::delta() const {
  const double target = is_unilateral() ? tolerance().target : bilateral().target;
  return std::sqrt(static_cast<double>(n_)) * (process_.mu - target) / process_.sigma;
}

double EstimatorContext::lambda() const {
  const double d = delta();
  return d * d;
}

double EstimatorContext::standardized_reach() const {
  const double reach = is_unilateral() ? tolerance().reach() : bilateral().min_reach();
  return std::sqrt(static_cast<double>(n_)) * reach / process_.sigma;
}

double EstimatorContext::standardized_half_width() const {
  return std::sqrt(static_cast<double>(n_)) * bilateral().half_width() / process_.sigma;
}

double EstimatorContext::variance_scale() const {
  return variant_ == Variant::DivN ? 1.0 : (n_ - 1.0) / n_;
}

// ---------------------------------------------------------------------------
// Y / W densities

double w_density(double w, const YDensityParams& p) {
  if (w < 0.0) return 0.0;
  return p.alpha * normal_pdf(p.alpha * w - p.delta) +
         p.beta * normal_pdf(p.beta * w + p.delta);
}

double y_density(double y, const YDensityParams& p) {
  if (y <= 0.0) return 0.0;
  const double w = std::sqrt(y);
  return w_density(w, p) / (2.0 * w);
}

EstimatorKernel make_kernel(const EstimatorContext& ctx, IndexParams ip) {
  ip.validate();
  EstimatorKernel k;
  k.n = ctx.n();
  k.reach = ctx.standardized_reach();
  k.v = ip.v;
  k.variance_scale = ctx.variance_scale();
  const double delta = ctx.delta();
  if (ctx.is_unilateral()) {
    const auto& t = ctx.tolerance();
    k.shift = ip.u;
    k.y = t.side == Side::Upper ? YDensityParams::upper(delta, t.k)
                                : YDensityParams::lower(delta, t.k);
  } else {
    const auto& b = ctx.bilateral();
    k.shift = ip.u * b.min_reach() / b.half_width();
    k.y = YDensityParams::asymmetric(delta, b.upper_reach(), b.lower_reach(), b.half_width());
  }
  return k;
}

// ---------------------------------------------------------------------------
// Densities

double density_integrand(const EstimatorKernel& kernel, double x, double t) {
  if (x == 0.0 || t < 0.0) return 0.0;
  const double denom = kernel.shift + 3.0 * x * std::sqrt(kernel.v);
  if (denom <= 0.0) return 0.0;
  const double kx = std::pow(kernel.reach / denom, 2);
  const double y = t * kx;
  const double a = kernel.reach - kernel.shift * std::sqrt(y);
  const double r = a / (3.0 * x);
  const double q = r * r - kernel.v * y;
  return scaled_chi2_pdf(q, kernel) * y_density(y, kernel.y) * (2.0 * kx / x) * r * r;
}

double kernel_density(const EstimatorKernel& kernel, double x) {
  if (std::abs(x) < kDensityExclusion || !std::isfinite(x)) return 0.0;
  if (kernel.shift == 0.0 && kernel.v == 0.0) return pure_scale_density(kernel, x);
  return general_density(kernel, x);
}

double support_lower_bound(const EstimatorKernel& kernel) {
  if (kernel.shift == 0.0) return 0.0;
  if (kernel.v == 0.0) return -kInf;
  return -kernel.shift / (3.0 * std::sqrt(kernel.v));
}

double density_unilateral(double x, const EstimatorContext& ctx, IndexParams ip) {
  (void)ctx.tolerance();
  return kernel_density(make_kernel(ctx, ip), x);
}

double density_general_asymmetric(double x, const EstimatorContext& ctx, IndexParams ip) {
  (void)ctx.bilateral();
  return kernel_density(make_kernel(ctx, ip), x);
}

double density_cpu_hat(double x, const EstimatorContext& ctx) {
  const auto& t = ctx.tolerance();
  if (x <= 0.0) return 0.0;
  const double n = ctx.n();
  const double m = ctx.variant() == Variant::DivN ? n : n - 1.0;
  const double c = t.reach() / (3.0 * ctx.process().sigma);
  const double ratio = c / x;
  const double log_f = 0.5 * (n - 1.0) * std::log(m) - std::log(c) -
                       std::lgamma(0.5 * (n - 1.0)) - 0.5 * (n - 3.0) * std::numbers::ln2 +
                       n * std::log(ratio) - 0.5 * m * ratio * ratio;
  return std::exp(log_f);
}

double bias_factor_b(int n) {
  if (n < 3) throw DomainError("bias_factor_b: n must be >= 3");
  return std::sqrt(2.0 / (n - 1.0)) * gamma_ratio(0.5 * (n - 1.0), 0.5 * (n - 2.0));
}

double bias_factor_c(int n) {
  if (n < 3) throw DomainError("bias_factor_c: n must be >= 3");
  return std::sqrt(2.0 / n) * gamma_ratio(0.5 * (n - 1.0), 0.5 * (n - 2.0));
}

double moments_cpu_hat(int r, const EstimatorContext& ctx) {
  const auto& t = ctx.tolerance();
  if (r < 0) throw DomainError("moments_cpu_hat: r must be non-negative");
  if (r == 0) return 1.0;
  const int n = ctx.n();
  if (r >= n - 1) throw DomainError("moments_cpu_hat: moment of order r >= n - 1 does not exist");
  const double m = ctx.variant() == Variant::DivN ? n : n - 1.0;
  const double c = t.reach() / (3.0 * ctx.process().sigma);
  return std::pow(0.5 * m, 0.5 * r) * gamma_ratio(0.5 * (n - 1.0 - r), 0.5 * (n - 1.0)) *
         std::pow(c, r);
}

MeanVariance mean_variance_cpu_hat(const EstimatorContext& ctx) {
  const double m1 = moments_cpu_hat(1, ctx);
  const double m2 = moments_cpu_hat(2, ctx);
  return {m1, m2 - m1 * m1};
}

// ---------------------------------------------------------------------------
// Moments

SeriesMoment series_moment(const EstimatorKernel& k, int r) {
  if (r < 0) throw DomainError("series_moment: r must be non-negative");
  if (r == 0) return {1.0, 0};
  if (r >= k.n - 1) {
    throw DomainError("series_moment: moment of order r >= n - 1 does not exist");
  }
  const double w = k.variance_scale;
  const double v = k.v * w;
  const double a = 0.5 * r;
  const double delta = k.y.delta;
  const double lambda = delta * delta;
  const double log_abs_delta = delta != 0.0 ? std::log(std::abs(delta)) : 0.0;
  const double z_alpha = 1.0 - v / (k.y.alpha * k.y.alpha);
  const double z_beta = 1.0 - v / (k.y.beta * k.y.beta);

  SeriesMoment out;
  double total = 0.0;
  for (int i = 0; i <= r; ++i) {
    // (-h)^i is 1 at i = 0 even when h = 0.
    if (i > 0 && k.shift == 0.0) continue;
    const double coef = (i == 0 ? 1.0 : std::pow(-k.shift, i)) * binomial(r, i) *
                        std::pow(k.reach / std::numbers::sqrt2, r - i);
    const double pa = std::pow(k.y.alpha, -i);
    const double pb = std::pow(k.y.beta, -i);

    double inner = 0.0;
    int settled = 0;
    for (int j = 0;; ++j) {
      if (j > kMaxSeriesTerms) {
        throw ConvergenceError("series_moment: inner series did not settle within " +
                               std::to_string(kMaxSeriesTerms) + " terms (delta = " +
                               std::to_string(delta) + ")");
      }
      if (delta == 0.0 && j > 0) break;  // delta^j vanishes
      const double b = 0.5 * (1.0 + i + j);
      const double c = 0.5 * (k.n + i + j);
      const double log_mag = j * log_abs_delta + 0.5 * j * std::numbers::ln2 -
                             std::lgamma(j + 1.0) - 0.5 * lambda + std::lgamma(c - a) +
                             std::lgamma(b) - std::lgamma(c);
      const bool odd = j % 2 == 1;
      const double gamma_ij = pa * gauss_2f1(a, b, c, z_alpha) +
                              (odd ? -1.0 : 1.0) * pb * gauss_2f1(a, b, c, z_beta);
      const double sign = (delta < 0.0 && odd) ? -1.0 : 1.0;
      const double term = sign * std::exp(log_mag) * gamma_ij;
      inner += term;
      out.terms = std::max(out.terms, j);
      settled = std::abs(term) <= kSeriesRelTol * std::abs(inner) ? settled + 1 : 0;
      if (settled >= kSeriesSettleRun && j > lambda + kSeriesMinExtraTerms) break;
    }
    total += coef * inner;
  }
  out.value = total / (2.0 * std::sqrt(std::numbers::pi)) / std::pow(3.0, r) *
              std::pow(w, 0.5 * r);
  return out;
}

SeriesMoment moment_unilateral(int r, const EstimatorContext& ctx, IndexParams ip) {
  (void)ctx.tolerance();
  return series_moment(make_kernel(ctx, ip), r);
}

SeriesMoment moment_asymmetric(int r, const EstimatorContext& ctx, IndexParams ip) {
  (void)ctx.bilateral();
  return series_moment(make_kernel(ctx, ip), r);
}

RawMoments closed_form_cpku_moments(const EstimatorContext& ctx) {
  const auto& t = ctx.tolerance();
  const int n = ctx.n();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  // The lower side is the upper side with delta mirrored.
  const double delta = t.side == Side::Upper ? ctx.delta() : -ctx.delta();
  const double reach = ctx.standardized_reach();  // sqrt(n) (U - T) / sigma
  const double k = t.k;
  const double cpku = (reach - std::max(delta, -delta / k)) / (3.0 * sqrt_n);

  const double abs_d = std::abs(delta);
  const double tail = normal_pdf(delta) - abs_d * normal_cdf(-abs_d);
  const double cf = bias_factor_c(n);
  const double mean = (cpku - (1.0 + 1.0 / k) / (3.0 * sqrt_n) * tail) / cf;

  const double odd_term = std::abs(delta) < kDeltaLimit
                              ? normal_pdf(0.0)
                              : (1.0 - 2.0 * normal_cdf(-delta)) / (2.0 * delta);
  const double second =
      n / (n - 3.0) *
      (cpku * cpku - 2.0 * reach * (1.0 + 1.0 / k) / (9.0 * n) * tail +
       (1.0 + 1.0 / (k * k)) / (18.0 * n) +
       delta * (1.0 - 1.0 / (k * k)) / (9.0 * n) * (tail + odd_term));

  const double w = ctx.variance_scale();
  return {mean * std::sqrt(w), second * w};
}

// ---------------------------------------------------------------------------
// Curves and integrals

DensityCurve density_curve(const EstimatorContext& ctx, IndexParams ip, double lo, double hi,
                           int points) {
  if (points < 2 || !(hi > lo)) throw DomainError("density_curve: need lo < hi and >= 2 points");
  const auto kernel = make_kernel(ctx, ip);
  DensityCurve curve;
  curve.domain_lo = lo;
  curve.domain_hi = hi;
  curve.points.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1.0);
    curve.points.push_back({x, kernel_density(kernel, x)});
  }
  return curve;
}

void write_density_csv(std::ostream& out, const DensityCurve& curve,
                       const std::string& header_comment) {
  std::istringstream lines(header_comment);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  out << "# domain=" << curve.domain_lo << ',' << curve.domain_hi
      << " exclusion=" << curve.exclusion << '\n';
  out << "x,f\n";
  out << std::setprecision(17);
  for (const auto& p : curve.points) out << p.x << ',' << p.f << '\n';
}

quad::Result integrate_density(const EstimatorKernel& kernel, double a, double b,
                               const quad::Control& ctl) {
  a = std::max(a, support_lower_bound(kernel));
  if (!(b > a)) return {0.0, 0.0, 0, true};
  auto f = [&](double x) { return kernel_density(kernel, x); };

  // Landmarks: the centre of the sigma-only estimator and the estimator value
  // at the W mode.
  const double k_mean = (kernel.n - 1.0) / kernel.variance_scale;
  const double s0 = w_mode(kernel.y);
  const double x0 = kernel.reach / (3.0 * std::sqrt(k_mean));
  const double x1 = (kernel.reach - kernel.shift * s0) /
                    (3.0 * std::sqrt(k_mean + kernel.v * s0 * s0));
  const double big = 4.0 * std::max(std::abs(x0), std::abs(x1)) + 1.0;
  std::vector<double> marks{-big, -kDensityExclusion, kDensityExclusion, x1, x0, 0.5 * x0, big};
  std::sort(marks.begin(), marks.end());

  std::vector<double> cuts{a};
  for (double m : marks) {
    if (m > a && m < b) cuts.push_back(m);
  }
  cuts.push_back(b);

  quad::Result total{0.0, 0.0, 0, true};
  auto accumulate = [&](const quad::Result& r) {
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
    total.converged = total.converged && r.converged;
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (std::abs(lo) <= kDensityExclusion && std::abs(hi) <= kDensityExclusion) {
      // The density is continuous through the excluded window; bridge it with
      // a trapezoid between the window edges.
      const double edge = 0.5 * (f(-kDensityExclusion) + f(kDensityExclusion));
      accumulate({edge * (hi - lo), 0.0, 1, true});
      continue;
    }
    if (std::isinf(lo) && std::isinf(hi)) continue;  // cannot happen after cuts
    if (std::isinf(hi)) {
      accumulate(quad::integrate_to_infinity(f, lo, ctl));
    } else if (std::isinf(lo)) {
      auto g = [&](double x) { return f(-x); };
      accumulate(quad::integrate_to_infinity(g, -hi, ctl));
    } else {
      accumulate(quad::integrate(f, lo, hi, ctl));
    }
  }
  return total;
}

}  // namespace unicap
