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

// Globally adaptive Gauss-Kronrod (7/15) quadrature.

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

namespace unicap::quad {

struct Control {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integrate f over [a, b], splitting first at the given interior breakpoints.
template <class F>
Result integrate(F&& f, double a, double b, std::span<const double> breaks,
                 const Control& ctl = {}) {
  Result out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::vector<double> edges{a};
  for (double x : breaks) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::priority_queue<detail::Segment> heap;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto s = detail::gk15(f, edges[i], edges[i + 1]);
    total += s.value;
    error += s.error;
    heap.push(s);
  }
  int intervals = static_cast<int>(heap.size());
  while (error > std::max(ctl.abs_tol, ctl.rel_tol * std::abs(total)) &&
         intervals < ctl.max_intervals) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;  // interval cannot be split further in double precision
    }
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Recompute sums from the segments to shed accumulated drift.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = error;
  out.intervals = intervals;
  out.converged = error <= std::max(ctl.abs_tol, ctl.rel_tol * std::abs(total));
  return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Control& ctl = {}) {
  return integrate(std::forward<F>(f), a, b, std::span<const double>{}, ctl);
}

/// Integrate f over [a, +inf) through x = a + s / (1 - s).
template <class F>
Result integrate_to_infinity(F&& f, double a, const Control& ctl = {}) {
  auto g = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double one_minus = 1.0 - s;
    const double v = f(a + s / one_minus);
    return v / (one_minus * one_minus);
  };
  return integrate(g, 0.0, 1.0, std::span<const double>{}, ctl);
}

}  // namespace unicap::quad
