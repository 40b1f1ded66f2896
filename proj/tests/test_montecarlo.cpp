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
#include <vector>

#include <doctest.h>

#include "unicap/error.hpp"
#include "unicap/montecarlo.hpp"

using namespace unicap;

namespace {

EstimatorContext example_ctx(Variant variant = Variant::DivN) {
  return EstimatorContext::unilateral(10, {0.5, 1.0}, ToleranceSpec::upper(4.0, 0.0, 3.0),
                                      variant);
}

SimConfig config(std::size_t reps, std::uint64_t seed, IndexParams ip = index_params::kCpk) {
  return SimConfig{reps, seed, example_ctx(), ip, HistogramSpec{0.0, 3.0, 40}, 1};
}

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("uniform stream is keyed and stays inside (0, 1)") {
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (std::uint64_t i = 0; i < 20000; ++i) {
      const double u = stream_uniform(3, i / 10, i % 10);
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      sum += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));
    CHECK(stream_uniform(1, 2, 3) == stream_uniform(1, 2, 3));
    CHECK(stream_uniform(1, 2, 3) != stream_uniform(2, 2, 3));
    CHECK(stream_uniform(1, 2, 3) != stream_uniform(1, 3, 2));
  }

  TEST_CASE("fixed seed gives bit-identical results for any thread count") {
    auto cfg = config(20000, 11);
    const auto a = simulate_estimator(cfg);
    const auto b = simulate_estimator(cfg);
    cfg.threads = 3;
    const auto c = simulate_estimator(cfg);
    CHECK(a.empirical_mean == b.empirical_mean);
    CHECK(a.empirical_mean == c.empirical_mean);
    CHECK(a.empirical_second_moment == c.empirical_second_moment);
    CHECK(a.se_second_moment == c.se_second_moment);
    REQUIRE(a.histogram.size() == c.histogram.size());
    for (std::size_t i = 0; i < a.histogram.size(); ++i) {
      CHECK(a.histogram[i].mass == c.histogram[i].mass);
    }
    cfg.seed = 12;
    CHECK(simulate_estimator(cfg).empirical_mean != a.empirical_mean);
  }

  TEST_CASE("histogram masses sum to one") {
    const auto res = simulate_estimator(config(10000, 5));
    REQUIRE(res.histogram.size() == 42);
    CHECK(std::isinf(res.histogram.front().lo));
    CHECK(std::isinf(res.histogram.back().hi));
    double total = 0.0;
    for (const auto& b : res.histogram) total += b.mass;
    CHECK(std::abs(total - 1.0) < 1e-12);
  }

  TEST_CASE("standard errors scale as one over root N") {
    const auto small = simulate_estimator(config(20000, 21));
    const auto large = simulate_estimator(config(80000, 21));
    CHECK(small.se_mean / large.se_mean == doctest::Approx(2.0).epsilon(0.2));
    CHECK(small.se_second_moment / large.se_second_moment == doctest::Approx(2.0).epsilon(0.2));
  }

  TEST_CASE("simulated Cpu matches the closed-form mean") {
    auto cfg = config(200000, 2026, index_params::kCp);
    const auto res = simulate_estimator(cfg);
    const double m1 = moments_cpu_hat(1, cfg.ctx);
    const double m2 = moments_cpu_hat(2, cfg.ctx);
    const auto v = compare_to_analytics(res, m1, m2);
    CHECK(v.pass);
    CHECK_FALSE(v.ks_distance.has_value());
  }

  TEST_CASE("simulated Cpmku matches series moments and the exact CDF") {
    auto cfg = config(200000, 99, index_params::kCpmk);
    const auto res = simulate_estimator(cfg);
    const auto kernel = make_kernel(cfg.ctx, cfg.ip);
    const auto v = compare_to_analytics(
        res, series_moment(kernel, 1).value, series_moment(kernel, 2).value,
        [&](double x) { return integrate_density(kernel, -INFINITY, x).value; });
    CHECK(v.pass);
    REQUIRE(v.ks_distance.has_value());
    CHECK(*v.ks_distance < 5e-3);
  }

  TEST_CASE("verdict logic") {
    SimResult res;
    res.replications = 1000;
    res.empirical_mean = 1.0;
    res.empirical_second_moment = 2.0;
    res.se_mean = 0.01;
    res.se_second_moment = 0.02;
    const auto same = compare_to_analytics(res, 1.0, 2.0);
    CHECK(same.pass);
    CHECK(same.z_mean == 0.0);
    CHECK(same.z_second_moment == 0.0);
    const auto off = compare_to_analytics(res, 1.1, 2.0);
    CHECK_FALSE(off.pass);
    CHECK(off.z_mean == doctest::Approx(-10.0));
    res.se_mean = 0.0;
    CHECK_THROWS_AS(compare_to_analytics(res, 1.0, 2.0), DomainError);
  }

  TEST_CASE("Cpmku estimates concentrate as sigma shrinks") {
    // With v > 0 the estimate tends to (U - T - A*) / (3 A*) as sigma -> 0.
    const auto ctx = EstimatorContext::unilateral(10, {0.5, 1e-6},
                                                  ToleranceSpec::upper(4.0, 0.0, 3.0));
    const auto res = simulate_estimator({5000, 1, ctx, index_params::kCpmk, std::nullopt, 1});
    CHECK(res.empirical_mean == doctest::Approx(3.5 / 1.5).epsilon(1e-5));
    const double var = res.empirical_second_moment - res.empirical_mean * res.empirical_mean;
    CHECK(std::abs(var) < 1e-6 * res.empirical_second_moment);
  }

  TEST_CASE("batch runs reproduce single-target runs") {
    const auto ctx_n = example_ctx(Variant::DivN);
    const auto ctx_n1 = example_ctx(Variant::DivNminus1);
    const std::vector<EstimatorTarget> targets{{ctx_n, index_params::kCpk, std::nullopt},
                                               {ctx_n1, index_params::kCpm, std::nullopt}};
    const auto batch = simulate_batch(targets, 8192, 4, 1);
    const auto one = simulate_estimator({8192, 4, ctx_n1, index_params::kCpm, std::nullopt, 1});
    CHECK(batch[1].empirical_mean == one.empirical_mean);
    CHECK(batch[1].se_mean == one.se_mean);

    const auto other = EstimatorContext::unilateral(11, {0.5, 1.0},
                                                    ToleranceSpec::upper(4.0, 0.0, 3.0));
    const std::vector<EstimatorTarget> mixed{{ctx_n, index_params::kCp, std::nullopt},
                                             {other, index_params::kCp, std::nullopt}};
    CHECK_THROWS_AS(simulate_batch(mixed, 2000, 1), DomainError);
    CHECK_THROWS_AS(simulate_estimator({10, 1, ctx_n, index_params::kCp, std::nullopt, 1}),
                    DomainError);
  }

  TEST_CASE("plug-in estimate from a sample") {
    const std::vector<double> xs{0.2, 1.1, -0.3, 0.8, 0.4};
    const auto ctx = EstimatorContext::unilateral(5, {0.0, 1.0}, ToleranceSpec::upper(4.0, 0.0, 2.0),
                                                  Variant::DivNminus1);
    double mean = 0.44;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double want = unilateral_index({mean, std::sqrt(ss / 4.0)},
                                         ToleranceSpec::upper(4.0, 0.0, 2.0), index_params::kCpmk);
    CHECK(estimate_from_sample(xs, ctx, index_params::kCpmk) == doctest::Approx(want).epsilon(1e-14));
  }

  TEST_CASE("JSON serialization") {
    const auto res = simulate_estimator(config(2000, 8));
    const nlohmann::json j = res;
    CHECK(j["replications"] == 2000);
    CHECK(j["histogram"].size() == 42);
    CHECK(j["histogram"][0][0].is_null());
    CHECK(j["histogram"][41][1].is_null());
    Verdict v;
    v.pass = true;
    v.ks_distance = 0.01;
    const nlohmann::json jv = v;
    CHECK(jv["pass"] == true);
    CHECK(jv["ks_distance"] == 0.01);
  }
}
