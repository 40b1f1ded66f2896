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

#include <random>
#include <vector>

#include <doctest.h>

#include "unicap/error.hpp"
#include "unicap/normality_screen.hpp"
#include "unicap/sample_io.hpp"

using namespace unicap;

TEST_SUITE("normality_screen") {
  TEST_CASE("maleic anhydride sample is rejected at 5%") {
    const auto y = load_sample(std::string(UNICAP_DATA_DIR) + "/maleic_anhydride_ppm.txt");
    const auto s = chi_square_normality_test(y);
    CHECK(s.bins_requested == 10);
    CHECK(s.dof == s.bins_used - 3);
    CHECK_FALSE(s.inconclusive);
    CHECK(s.p_value < kNormalityAlpha);
    CHECK(s.rejects_normality());
  }

  TEST_CASE("normal samples pass in at least 90% of seeded trials") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> dist(50.0, 4.0);
    int passed = 0;
    std::vector<double> y(10000);
    for (int trial = 0; trial < 100; ++trial) {
      for (double& v : y) v = dist(rng);
      if (!chi_square_normality_test(y).rejects_normality()) ++passed;
    }
    CHECK(passed >= 90);
  }

  TEST_CASE("exponential samples are rejected") {
    std::mt19937_64 rng(77);
    std::exponential_distribution<double> dist(1.0);
    std::vector<double> y(500);
    for (double& v : y) v = dist(rng);
    CHECK(chi_square_normality_test(y).rejects_normality());
  }

  TEST_CASE("too few classes makes the screen inconclusive") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist;
    std::vector<double> y(30);
    for (double& v : y) v = dist(rng);
    const auto s = chi_square_normality_test(y, 3);
    CHECK(s.inconclusive);
    CHECK_FALSE(s.rejects_normality());
  }

  TEST_CASE("preconditions") {
    CHECK_THROWS_AS(chi_square_normality_test(std::vector<double>(25, 1.0)), DegenerateError);
    CHECK_THROWS_AS(chi_square_normality_test(std::vector<double>(10, 1.0)), DomainError);
  }
}
