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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <doctest.h>

#include "unicap/error.hpp"
#include "unicap/nonnormal_indices.hpp"
#include "unicap/sample_io.hpp"

using namespace unicap;

namespace {

std::vector<double> maleic_sample() {
  return load_sample(std::string(UNICAP_DATA_DIR) + "/maleic_anhydride_ppm.txt");
}

}  // namespace

TEST_SUITE("nonnormal") {
  TEST_CASE("fixture has 86 observations with median 685") {
    const auto y = maleic_sample();
    REQUIRE(y.size() == 86);
    CHECK(sample_median(y) == 685.0);
  }

  TEST_CASE("Shore fit of the maleic anhydride sample") {
    const auto fit = shore_fit(maleic_sample());
    CHECK(fit.median == 685.0);
    CHECK(fit.a1 == doctest::Approx(677.7147).epsilon(1e-6));
    CHECK(fit.b1 == doctest::Approx(0.050145).epsilon(1e-5));
    CHECK(fit.a2 == doctest::Approx(48.3066).epsilon(1e-6));
    CHECK(fit.b2 == doctest::Approx(695.7118).epsilon(1e-6));
    CHECK(shore_quantile(fit, kLowerTailProbability) == doctest::Approx(486.6058).epsilon(1e-6));
    CHECK(shore_quantile(fit, kUpperTailProbability) == doctest::Approx(1014.8397).epsilon(1e-6));
  }

  TEST_CASE("percentile indices for the maleic anhydride sample") {
    const auto ps = summarize_sample(maleic_sample(), PercentileMethod::Shore);
    const auto k3 = nonnormal_report(ps, ToleranceSpec::lower(400.0, 480.0, 3.0));
    CHECK(k3.cpu_or_cpl == doctest::Approx(0.40324).epsilon(1e-4));
    CHECK(k3.cpk_side == doctest::Approx(0.058805).epsilon(1e-4));
    CHECK(k3.cpm_side == doctest::Approx(0.280425).epsilon(1e-4));
    CHECK(k3.cpmk_side == doctest::Approx(0.040895).epsilon(1e-4));
    const auto k10 = nonnormal_report(ps, ToleranceSpec::lower(400.0, 480.0, 10.0));
    CHECK(k10.cpk_side == doctest::Approx(0.299908).epsilon(1e-4));
    CHECK(k10.cpm_side == doctest::Approx(0.385157).epsilon(1e-4));
    CHECK(k10.cpmk_side == doctest::Approx(0.286460).epsilon(1e-4));
  }

  TEST_CASE("normal percentiles reproduce the normal-theory indices") {
    const ProcessParams p{1.3, 0.7};
    const PercentileSummary ps{p.mu, p.mu - 3.0 * p.sigma, p.mu + 3.0 * p.sigma};
    for (const auto& t : {ToleranceSpec::upper(4.0, 0.5, 2.0), ToleranceSpec::lower(-2.0, 0.5, 5.0)}) {
      const auto a = unilateral_report(p, t);
      const auto b = nonnormal_report(ps, t);
      CHECK(b.cpu_or_cpl == doctest::Approx(a.cpu_or_cpl).epsilon(1e-14));
      CHECK(b.cpk_side == doctest::Approx(a.cpk_side).epsilon(1e-14));
      CHECK(b.cpm_side == doctest::Approx(a.cpm_side).epsilon(1e-14));
      CHECK(b.cpmk_side == doctest::Approx(a.cpmk_side).epsilon(1e-14));
      CHECK(b.delta == doctest::Approx(a.delta).epsilon(1e-14));
    }
  }

  TEST_CASE("lower branch ignores the upper half of the sample") {
    auto y = maleic_sample();
    const auto base = shore_fit(y);
    std::sort(y.begin(), y.end());
    for (std::size_t i = y.size() / 2; i < y.size(); ++i) y[i] *= 1.0 + 0.01 * (i % 5);
    const auto moved = shore_fit(y);
    CHECK(moved.a1 == base.a1);
    CHECK(moved.b1 == base.b1);
    CHECK(moved.a2 != base.a2);
  }

  TEST_CASE("fit is invariant to the order of observations") {
    auto y = maleic_sample();
    const auto base = shore_fit(y);
    std::mt19937_64 rng(5);
    std::shuffle(y.begin(), y.end(), rng);
    const auto shuffled = shore_fit(y);
    CHECK(shuffled.a1 == doctest::Approx(base.a1).epsilon(1e-13));
    CHECK(shuffled.b2 == doctest::Approx(base.b2).epsilon(1e-13));
  }

  TEST_CASE("odd sample sizes split the middle observation") {
    std::vector<double> y{3.0, 4.0, 5.5, 6.0, 8.0, 9.5, 12.0};
    const auto fit = shore_fit(y);
    CHECK(fit.median == 6.0);
    CHECK_FALSE(fit.degenerate());
    const double lo = shore_quantile(fit, kLowerTailProbability);
    const double hi = shore_quantile(fit, kUpperTailProbability);
    CHECK(lo < fit.median);
    CHECK(hi > fit.median);
  }

  TEST_CASE("lognormal sample gives ordered percentiles near the truth") {
    std::mt19937_64 rng(17);
    std::lognormal_distribution<double> dist(2.0, 0.25);
    std::vector<double> y(5000);
    for (double& v : y) v = dist(rng);
    const auto ps = summarize_sample(y, PercentileMethod::Shore);
    CHECK(ps.lower_pct < ps.median);
    CHECK(ps.median < ps.upper_pct);
    CHECK(ps.median == doctest::Approx(std::exp(2.0)).epsilon(0.02));
    // The two-branch form is only an approximation this far into the tails.
    CHECK(ps.lower_pct == doctest::Approx(std::exp(2.0 - 3.0 * 0.25)).epsilon(0.15));
    CHECK(ps.upper_pct == doctest::Approx(std::exp(2.0 + 3.0 * 0.25)).epsilon(0.15));
  }

  TEST_CASE("degenerate and invalid samples") {
    CHECK_THROWS_AS(shore_fit(std::vector<double>(10, 5.0)), DegenerateError);
    CHECK_THROWS_AS(shore_fit(std::vector<double>{1.0, 2.0, 3.0}), DomainError);
    CHECK_THROWS_AS(shore_fit(std::vector<double>{1.0, -2.0, 3.0, 4.0}), DomainError);
    CHECK_THROWS_AS(summarize_sample(std::vector<double>{1.0, 2.0}, PercentileMethod::Empirical),
                    DomainError);
    const PercentileSummary bad{5.0, 5.0, 9.0};
    CHECK_THROWS_AS(bad.validate(), DegenerateError);
    CHECK_THROWS_AS(nonnormal_unilateral_index(bad, ToleranceSpec::lower(0.0, 4.0, 2.0),
                                               index_params::kCp),
                    DegenerateError);
  }

  TEST_CASE("empirical quantiles interpolate order statistics") {
    std::vector<double> y(1000);
    std::iota(y.begin(), y.end(), 1.0);
    CHECK(empirical_quantile(y, kLowerTailProbability) == doctest::Approx(2.34865).epsilon(1e-12));
    CHECK(empirical_quantile(y, kUpperTailProbability) == doctest::Approx(998.65135).epsilon(1e-12));
    CHECK(empirical_quantile(y, 0.0) == 1.0);
    CHECK(empirical_quantile(y, 1.0) == 1000.0);
    const auto ps = summarize_sample(y, PercentileMethod::Empirical);
    CHECK(ps.median == 500.5);
  }
}
