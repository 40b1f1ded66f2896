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

namespace unicap {

/// Truncation budget for power series.
struct SeriesControl {
  double rel_tol = 1e-14;
  int max_terms = 10000;
};

/// Gaussian hypergeometric function 2F1(a, b; c; z) for real z <= 1.
///
/// Negative z goes through the Pfaff transformation, 0 <= z <= 0.95 is summed
/// directly, 0.95 < z < 1 uses the connection formulas around z = 1
/// (including the logarithmic cases where c - a - b is an integer) and z = 1
/// is Gauss's summation theorem, which requires c - a - b > 0.
double gauss_2f1(double a, double b, double c, double z,
                 const SeriesControl& ctl = {});

/// log|Gamma(x)| for x > 0.
double ln_gamma(double x);

/// Gamma(num) / Gamma(den), evaluated in log space.
double gamma_ratio(double num, double den);

/// Digamma function psi(x); x must not be a non-positive integer.
double digamma(double x);

double normal_pdf(double x);
double normal_cdf(double x);

/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// Density of the chi-square distribution with `dof` degrees of freedom.
double chi2_pdf(double x, double dof);

}  // namespace unicap
