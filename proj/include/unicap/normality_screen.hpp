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

#include <span>

namespace unicap {

inline constexpr double kNormalityAlpha = 0.05;

struct NormalityScreen {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins_requested = 0;
  int bins_used = 0;
  /// Fewer than four classes survived merging; p_value is meaningless.
  bool inconclusive = false;

  bool rejects_normality() const { return !inconclusive && p_value < kNormalityAlpha; }
};

/// Pearson chi-square goodness of fit against the normal with plug-in mean
/// and S_{n-1}. Classes are equal-width over the sample range (outer classes
/// open-ended); adjacent classes are merged until each expects >= 5
/// observations; dof = classes - 3. `bins` = 0 picks ceil(sqrt(n)).
/// Requires n >= 20; a constant sample raises DegenerateError.
NormalityScreen chi_square_normality_test(std::span<const double> sample, int bins = 0);

}  // namespace unicap
