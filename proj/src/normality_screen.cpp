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

#include "unicap/normality_screen.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "unicap/error.hpp"
#include "unicap/special_functions.hpp"

namespace unicap {
namespace {

constexpr double kMinExpected = 5.0;

struct Cell {
  double expected;
  double observed;
};

void merge_into(std::vector<Cell>& cells, std::size_t from, std::size_t into) {
  cells[into].expected += cells[from].expected;
  cells[into].observed += cells[from].observed;
  cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(from));
}

}  // namespace

NormalityScreen chi_square_normality_test(std::span<const double> sample, int bins) {
  const std::size_t n = sample.size();
  if (n < 20) throw DomainError("normality screen: needs at least 20 observations");
  if (bins < 0) throw DomainError("normality screen: negative bin count");

  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const auto [min_it, max_it] = std::minmax_element(sample.begin(), sample.end());
  if (!(sd > 0.0) || *min_it == *max_it) {
    throw DegenerateError("normality screen: sample has no spread");
  }

  NormalityScreen out;
  out.bins_requested = bins > 0 ? bins : static_cast<int>(std::ceil(std::sqrt(double(n))));
  const int k = out.bins_requested;
  const double lo = *min_it;
  const double width = (*max_it - lo) / k;

  std::vector<Cell> cells(k, Cell{0.0, 0.0});
  double prev_cdf = 0.0;
  for (int i = 0; i < k; ++i) {
    const double cdf = i + 1 == k ? 1.0 : normal_cdf((lo + (i + 1) * width - mean) / sd);
    cells[i].expected = n * (cdf - prev_cdf);
    prev_cdf = cdf;
  }
  for (double x : sample) {
    const auto i = static_cast<int>((x - lo) / width);
    cells[std::clamp(i, 0, k - 1)].observed += 1.0;
  }

  // Fold sparse tails inward, then merge any remaining sparse interior cell
  // with its right neighbour (left at the end).
  while (cells.size() > 1 && cells.front().expected < kMinExpected) merge_into(cells, 0, 1);
  while (cells.size() > 1 && cells.back().expected < kMinExpected) {
    merge_into(cells, cells.size() - 1, cells.size() - 2);
  }
  for (std::size_t i = 0; i < cells.size();) {
    if (cells[i].expected < kMinExpected && cells.size() > 1) {
      if (i + 1 < cells.size()) {
        merge_into(cells, i + 1, i);
      } else {
        merge_into(cells, i, i - 1);
      }
    } else {
      ++i;
    }
  }

  out.bins_used = static_cast<int>(cells.size());
  out.dof = out.bins_used - 3;
  for (const auto& c : cells) {
    const double d = c.observed - c.expected;
    out.statistic += d * d / c.expected;
  }
  if (out.dof < 1) {
    out.inconclusive = true;
    out.p_value = 1.0;
    return out;
  }
  out.p_value = boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic);
  return out;
}

}  // namespace unicap
