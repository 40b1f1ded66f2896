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

#include <cmath>
#include <random>

#include <doctest.h>

#include "unicap/core_indices.hpp"
#include "unicap/error.hpp"

using namespace unicap;

namespace {

struct Draw {
  ProcessParams p;
  ToleranceSpec t;
  IndexParams ip;
};

Draw random_draw(std::mt19937_64& rng, Side side) {
  std::uniform_real_distribution<double> target(-10.0, 10.0), reach(0.1, 20.0),
      sigma(0.05, 5.0), k(1.0, 12.0), uv(0.0, 5.0), offset(-1.5, 1.5);
  const double T = target(rng);
  const double R = reach(rng);
  const double kk = k(rng);
  const double limit = side == Side::Upper ? T + R : T - R;
  const ToleranceSpec t =
      side == Side::Upper ? ToleranceSpec::upper(limit, T, kk) : ToleranceSpec::lower(limit, T, kk);
  const double mu = T + offset(rng) * R * (side == Side::Upper ? 1.0 : -1.0);
  return {{mu, sigma(rng)}, t, {uv(rng), uv(rng)}};
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_SUITE("core_indices") {
  TEST_CASE("worked example on the upper side") {
    const ProcessParams p{2.0, 2.0};
    const auto t = ToleranceSpec::upper(6.0, 0.0, 3.0);
    const auto r = unilateral_report(p, t);
    CHECK(r.alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.delta == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.cpu_or_cpl == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.cpk_side == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.cpm_side == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(r.cpmk_side == doctest::Approx(2.0 / 3.0 / std::sqrt(2.0)).epsilon(1e-15));
  }

  TEST_CASE("all four indices coincide at the target") {
    const ProcessParams p{0.0, 2.0};
    const auto t = ToleranceSpec::upper(6.0, 0.0, 3.0);
    for (IndexParams ip : {index_params::kCp, index_params::kCpk, index_params::kCpm,
                           index_params::kCpmk, IndexParams{2.5, 7.0}}) {
      CHECK(unilateral_index(p, t, ip) == doctest::Approx(1.0).epsilon(1e-15));
    }
    const auto r = unilateral_report(p, t);
    CHECK(r.alpha == 0.0);
    CHECK(r.delta == 0.0);
  }

  TEST_CASE("drift away from the limit is discounted by k") {
    // mu below T on the upper side: A* = (T - mu)/k.
    const ProcessParams p{-3.0, 1.0};
    const auto t = ToleranceSpec::upper(6.0, 0.0, 3.0);
    CHECK(penalized_deviation(p.mu, t) == doctest::Approx(1.0));
    CHECK(unilateral_index(p, t, index_params::kCpk) == doctest::Approx(5.0 / 3.0));
    const auto lower = ToleranceSpec::lower(-6.0, 0.0, 3.0);
    CHECK(penalized_deviation(3.0, lower) == doctest::Approx(1.0));
    CHECK(penalized_deviation(-2.0, lower) == doctest::Approx(2.0));
  }

  TEST_CASE("classical bilateral indices") {
    const auto c = classical_indices({1.0, 1.0}, {-3.0, 5.0, 0.0});
    CHECK(c.cp == doctest::Approx(8.0 / 6.0));
    CHECK(c.cpk == doctest::Approx(4.0 / 3.0));
    CHECK(c.cpm == doctest::Approx(8.0 / (6.0 * std::sqrt(2.0))));
    CHECK(c.cpmk == doctest::Approx(4.0 / (3.0 * std::sqrt(2.0))));
    const auto off = classical_indices({6.0, 1.0}, {-3.0, 5.0, 0.0});
    CHECK(off.cpk < 0.0);
    CHECK(classical_indices({6.0, 1.0}, {-3.0, 5.0, 0.0}, Clamp::ZeroFloor).cpk == 0.0);
  }

  TEST_CASE("precondition errors") {
    CHECK_THROWS_AS(unilateral_index({0.0, 1.0}, ToleranceSpec::upper(-1.0, 0.0, 2.0),
                                     index_params::kCp),
                    DomainError);
    CHECK_THROWS_AS(unilateral_index({0.0, 1.0}, ToleranceSpec::upper(1.0, 0.0, 0.5),
                                     index_params::kCp),
                    DomainError);
    CHECK_THROWS_AS(unilateral_index({0.0, 0.0}, ToleranceSpec::upper(1.0, 0.0, 2.0),
                                     index_params::kCp),
                    DomainError);
    CHECK_THROWS_AS(unilateral_index({0.0, 1.0}, ToleranceSpec::upper(1.0, 0.0, 2.0),
                                     IndexParams{-1.0, 0.0}),
                    DomainError);
    CHECK_NOTHROW(unilateral_index({0.0, 1.0}, ToleranceSpec::upper(1.0, 0.0, 1.0),
                                   index_params::kCp));
  }

  TEST_CASE("clamp floors negative values only when asked") {
    const ProcessParams p{8.0, 1.0};
    const auto t = ToleranceSpec::upper(6.0, 0.0, 3.0);
    CHECK(unilateral_index(p, t, index_params::kCpk) < 0.0);
    CHECK(unilateral_index(p, t, index_params::kCpk, Clamp::ZeroFloor) == 0.0);
  }

  TEST_CASE("ordering, product identity and k-independence over random draws") {
    std::mt19937_64 rng(20260101);
    for (Side side : {Side::Upper, Side::Lower}) {
      for (int i = 0; i < 5000; ++i) {
        const auto d = random_draw(rng, side);
        const auto r = unilateral_report(d.p, d.t);
        REQUIRE(r.cpu_or_cpl >= r.cpk_side);
        REQUIRE(r.cpu_or_cpl >= r.cpm_side);
        REQUIRE(r.cpm_side >= r.cpmk_side - 1e-15 * std::abs(r.cpmk_side));
        // Past the limit both numerators are negative and the larger
        // denominator of Cpmku makes it the less negative of the two.
        if (r.cpk_side >= 0.0) {
          REQUIRE(r.cpk_side >= r.cpmk_side - 1e-15 * std::abs(r.cpmk_side));
        }
        REQUIRE(std::abs(r.cpmk_side * r.cpu_or_cpl - r.cpk_side * r.cpm_side) <=
                1e-12 * std::abs(r.cpk_side * r.cpm_side) + 1e-300);

        const bool toward = side == Side::Upper ? d.p.mu >= d.t.target : d.p.mu <= d.t.target;
        if (toward) {
          auto other = d.t;
          other.k = d.t.k * 3.7;
          REQUIRE(unilateral_index(d.p, d.t, d.ip) == unilateral_index(d.p, other, d.ip));
        }
      }
    }
  }

  TEST_CASE("Cpku is affine in mu between target and limit") {
    const auto t = ToleranceSpec::upper(6.0, 0.0, 3.0);
    auto cpku = [&](double mu) { return unilateral_index({mu, 2.0}, t, index_params::kCpk); };
    CHECK(std::abs(cpku(6.0)) < 1e-15);
    for (double mu = 0.0; mu <= 5.0; mu += 0.5) {
      CHECK(cpku(mu) - 2.0 * cpku(mu + 0.5) + cpku(mu + 1.0) == doctest::Approx(0.0));
    }
  }

  TEST_CASE("Cpmu = 1 forces the mean into the middle third") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> frac(0.01, 0.32);
    const auto t = ToleranceSpec::upper(9.0, 0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      // Pick sigma so that the boundary exists, then bisect for mu.
      const double sigma = frac(rng) * t.reach();
      for (auto [ip, fraction] : {std::pair{index_params::kCpm, 1.0 / 3.0},
                                  std::pair{index_params::kCpmk, 1.0 / 4.0}}) {
        auto g = [&](double mu) { return unilateral_index({mu, sigma}, t, ip) - 1.0; };
        if (g(0.0) <= 0.0) continue;
        double lo = 0.0;
        double hi = t.limit;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          (g(mid) > 0.0 ? lo : hi) = mid;
        }
        CHECK(lo - t.target < fraction * t.reach());
      }
    }
  }

  TEST_CASE("legacy families reduce to each other") {
    std::mt19937_64 rng(3);
    for (Side side : {Side::Upper, Side::Lower}) {
      for (int i = 0; i < 2000; ++i) {
        const auto d = random_draw(rng, side);
        LegacyOptions raw;
        raw.clamp = Clamp::Raw;
        auto with = [&](IndexParams ip) {
          LegacyOptions o = raw;
          o.params = ip;
          return o;
        };
        REQUIRE(rel_diff(legacy_index(d.p, d.t, LegacyFamily::VannmanCpa, with({0, 0})),
                         legacy_index(d.p, d.t, LegacyFamily::KaneCpu, raw)) < 1e-13);
        REQUIRE(rel_diff(legacy_index(d.p, d.t, LegacyFamily::VannmanCpa, with({0, 1})),
                         legacy_index(d.p, d.t, LegacyFamily::VannmanCpmkSide, raw)) < 1e-13);
        REQUIRE(rel_diff(legacy_index(d.p, d.t, LegacyFamily::VannmanCpv, with({1, 0})),
                         legacy_index(d.p, d.t, LegacyFamily::KaneStar, raw)) < 1e-13);
        REQUIRE(rel_diff(legacy_index(d.p, d.t, LegacyFamily::VannmanCpv, with({0, 1})),
                         legacy_index(d.p, d.t, LegacyFamily::ChanCpmStar, raw)) < 1e-13);
      }
    }
  }

  TEST_CASE("legacy worked values and options") {
    const auto t = ToleranceSpec::upper(6.0, 0.0, 3.0);
    LegacyOptions cpa04;
    cpa04.params = IndexParams{0.0, 4.0};
    CHECK(legacy_index({0.0, 2.0}, t, LegacyFamily::VannmanCpa, cpa04) == doctest::Approx(1.0));
    LegacyOptions cpa01;
    cpa01.params = IndexParams{0.0, 1.0};
    CHECK(legacy_index({2.0, 2.0}, t, LegacyFamily::VannmanCpa, cpa01) ==
          doctest::Approx(4.0 / (3.0 * std::sqrt(8.0))));
    // Kane indices floor at zero by default.
    CHECK(legacy_index({7.0, 1.0}, t, LegacyFamily::KaneCpu) == 0.0);
    LegacyOptions raw;
    raw.clamp = Clamp::Raw;
    CHECK(legacy_index({7.0, 1.0}, t, LegacyFamily::KaneCpu, raw) == doctest::Approx(-1.0 / 3.0));
    CHECK_THROWS_AS(legacy_index({0.0, 1.0}, t, LegacyFamily::VannmanCpa), DomainError);
    CHECK_THROWS_AS(legacy_index({0.0, 1.0}, t, LegacyFamily::KaneStar, cpa04), DomainError);
  }

  TEST_CASE("unilateral index embeds into the asymmetric family") {
    std::mt19937_64 rng(99);
    for (Side side : {Side::Upper, Side::Lower}) {
      for (int i = 0; i < 3000; ++i) {
        const auto d = random_draw(rng, side);
        const auto b = embed_as_bilateral(d.t);
        const double vk = 4.0 * d.ip.v / ((1.0 + d.t.k) * (1.0 + d.t.k));
        REQUIRE(rel_diff(unilateral_index(d.p, d.t, d.ip),
                         chen_pearn_index(d.p, b, {d.ip.u, vk})) < 1e-12);
      }
    }
  }

  TEST_CASE("mean position from the Cpk / Cp ratio") {
    const auto t = ToleranceSpec::upper(6.0, 0.0, 3.0);
    CHECK(mean_position_from_ratio(0.5, t) == doctest::Approx(3.0));
    CHECK(mean_position_from_ratio(1.0, t) == doctest::Approx(0.0));
    CHECK(mean_position_from_ratio(0.0, t) == doctest::Approx(6.0));
    CHECK_THROWS_AS(mean_position_from_ratio(1.5, t), DomainError);
    const double mu = mean_position_from_ratio(0.25, t);
    CHECK(unilateral_index({mu, 1.0}, t, index_params::kCpk) /
              unilateral_index({mu, 1.0}, t, index_params::kCp) ==
          doctest::Approx(0.25));
  }
}
