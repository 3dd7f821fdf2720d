/* Copyright 2026 The LongiPET Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <random>

#include "doctest.h"
#include "longipet/error.hpp"
#include "longipet/parallel.hpp"
#include "longipet/stats.hpp"
#include "stats_oracles.hpp"

using namespace longipet;
using namespace longipet::stats;
namespace oracle = longipet::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a longipet::Error");
  return ErrorKind::kContract;
}

}  // namespace

TEST_CASE("wilcoxon examples") {
  TestResult r = wilcoxon_signed_rank({1, -2, 3}, {0, 0, 0});
  CHECK(r.value == 2.0);
  CHECK(r.p == 0.75);
  CHECK(r.n == 3);
  CHECK(wilcoxon_signed_rank({1, 2, 3, 4}, {1, 2, 3, 5}).value == 0.0);
  CHECK(kind_of([] { wilcoxon_signed_rank({1, 2}, {1, 2}); }) == ErrorKind::kDegenerate);
  // Zero differences are dropped before ranking.
  CHECK(wilcoxon_signed_rank({1, -2, 3, 0}, {0, 0, 0, 0}).n == 3);
}

TEST_CASE("wilcoxon exact p equals enumeration, with and without ties") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> size(1, 12);
    const int n = size(rng);
    std::vector<double> d(n);
    const bool ties = trial % 2 == 0;
    std::uniform_real_distribution<double> cont(-1.0, 1.0);
    std::uniform_int_distribution<int> disc(-4, 4);
    for (double& x : d) {
      do {
        x = ties ? disc(rng) : cont(rng);
      } while (x == 0.0);
    }
    CAPTURE(trial);
    CHECK(wilcoxon_exact_p(d) == oracle::wilcoxon_enumeration_p(d));
  }
}

TEST_CASE("normal approximation tracks the exact distribution") {
  Rng rng(7);
  std::normal_distribution<double> noise(0.3, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> d(30);
    for (double& x : d) x = noise(rng);
    // Exact p at n = 30 via the dynamic program; the enumeration oracle
    // validates that program for small n above.
    CHECK(std::abs(wilcoxon_normal_p(d) - wilcoxon_exact_p(d)) < 0.02);
    std::vector<double> half(d.begin(), d.begin() + 15);
    CHECK(wilcoxon_exact_p(half) == oracle::wilcoxon_enumeration_p(half));
  }
  // Above the exact threshold the test switches to the approximation.
  std::vector<double> x(40), y(40, 0.0);
  for (int i = 0; i < 40; ++i) x[i] = (i % 3 == 0 ? -1.0 : 1.0) * (i + 1);
  CHECK(wilcoxon_signed_rank(x, y).p == wilcoxon_normal_p(x));
}

TEST_CASE("paired t") {
  TestResult r = paired_t({1, 2, 3}, {1, 3, 5});
  CHECK(r.value == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-12));
  CHECK(r.df == 2);
  // Two-sided p for |t| = sqrt(3), df = 2: 1 - sqrt(3)/sqrt(5) by the closed-form df=2 CDF.
  CHECK(r.p == doctest::Approx(1.0 - std::sqrt(3.0) / std::sqrt(5.0)).epsilon(1e-10));
  TestResult z = paired_t({0, 2}, {1, 1});
  CHECK(z.value == 0.0);
  CHECK(z.p == 1.0);
  CHECK(kind_of([] { paired_t({1, 2, 3}, {0, 1, 2}); }) == ErrorKind::kDegenerate);
  for (double df : {1.0, 3.0, 40.0}) CHECK(student_t_cdf(0.0, df) == 0.5);
}

TEST_CASE("one-way anova") {
  CHECK(one_way_anova({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}).value == 0.0);
  CHECK(one_way_anova({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}).p == 1.0);
  CHECK(one_way_anova({{1, 5, 3}, {3, 2, 4}}).value == doctest::Approx(0.0).epsilon(1e-12));
  // Two groups: F equals the squared pooled two-sample t.
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> a(6 + trial), b(4 + trial % 3);
    for (double& x : a) x = g(rng);
    for (double& x : b) x = g(rng) + 0.5;
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / v.size();
    };
    const double ma = mean(a), mb = mean(b);
    double ss = 0;
    for (double x : a) ss += (x - ma) * (x - ma);
    for (double x : b) ss += (x - mb) * (x - mb);
    const double sp2 = ss / (a.size() + b.size() - 2.0);
    const double t = (ma - mb) / std::sqrt(sp2 * (1.0 / a.size() + 1.0 / b.size()));
    TestResult f = one_way_anova({a, b});
    CHECK(std::abs(f.value - t * t) < 1e-10);
    CHECK(f.df == 1);
    CHECK(f.df2 == a.size() + b.size() - 2.0);
  }
  CHECK(kind_of([] { one_way_anova({{1, 2}}); }) == ErrorKind::kInput);
}

TEST_CASE("chi-square independence") {
  TestResult even = chi_square_independence({{10, 10}, {10, 10}});
  CHECK(even.value == 0.0);
  CHECK(even.p == 1.0);
  TestResult split = chi_square_independence({{20, 0}, {0, 20}});
  CHECK(split.value == doctest::Approx(40.0).epsilon(1e-14));
  CHECK(split.df == 1);
  CHECK(chi_square_independence({{3, 4}, {5, 6}, {7, 9}}).df == 2);
  CHECK(kind_of([] { chi_square_independence({{0, 0}, {1, 2}}); }) == ErrorKind::kDegenerate);
}

TEST_CASE("mixed anova") {
  SUBCASE("identical values") {
    MixedAnovaResult r = mixed_anova({{2, 2, 2}, {2, 2, 2}, {2, 2, 2}, {2, 2, 2}}, {0, 0, 1, 1});
    CHECK(r.between.value == 0.0);
    CHECK(r.within.value == 0.0);
    CHECK(r.interaction.value == 0.0);
  }
  SUBCASE("subjects constant across levels") {
    MixedAnovaResult r = mixed_anova({{1, 1, 1}, {2, 2, 2}, {5, 5, 5}, {3, 3, 3}}, {0, 0, 1, 1});
    CHECK(std::abs(r.ss_within) < 1e-12);
    CHECK(std::abs(r.ss_interaction) < 1e-12);
    CHECK(r.between.value > 0.0);
  }
  SUBCASE("sums of squares equal the definitional oracle") {
    Rng rng(99);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_int_distribution<int> groups(2, 3), per(2, 5), levels(2, 4);
    for (int trial = 0; trial < 50; ++trial) {
      const int ng = trial == 0 ? 2 : groups(rng), nb = trial == 0 ? 3 : levels(rng);
      std::vector<std::vector<double>> y;
      std::vector<int> grp;
      for (int a = 0; a < ng; ++a) {
        const int n = trial == 0 ? 4 : per(rng);
        for (int s = 0; s < n; ++s) {
          std::vector<double> row(nb);
          for (int b = 0; b < nb; ++b) row[b] = g(rng) + 0.3 * a + 0.2 * b;
          y.push_back(row);
          grp.push_back(a);
        }
      }
      MixedAnovaResult r = mixed_anova(y, grp);
      auto o = oracle::split_plot_sums(y, grp);
      CHECK(std::abs(r.ss_between - o.between) < 1e-10);
      CHECK(std::abs(r.ss_subjects - o.subjects) < 1e-10);
      CHECK(std::abs(r.ss_within - o.level) < 1e-10);
      CHECK(std::abs(r.ss_interaction - o.interaction) < 1e-10);
      CHECK(std::abs(r.ss_error_within - o.error) < 1e-10);
      CHECK(std::abs(r.ss_total - o.total) < 1e-10);
      CHECK(std::abs(r.ss_between + r.ss_subjects + r.ss_within + r.ss_interaction + r.ss_error_within -
                     r.ss_total) < 1e-10);
      for (const TestResult* t : {&r.between, &r.within, &r.interaction}) {
        CHECK(t->p >= 0.0);
        CHECK(t->p <= 1.0);
      }
    }
  }
  SUBCASE("missing level is an input error") {
    CHECK(kind_of([] { mixed_anova({{1, 2}, {1}, {2, 3}}, {0, 0, 1}); }) == ErrorKind::kInput);
  }
}

TEST_CASE("bonferroni") {
  CHECK(bonferroni(0.05, 6) == 0.05 / 6);
  CHECK(bonferroni(0.05, 4) == 0.0125);
  CHECK(bonferroni(0.05, 1) == 0.05);
  CHECK(kind_of([] { bonferroni(0.05, 0); }) == ErrorKind::kParameter);
}

TEST_CASE("distribution functions match numerical integration") {
  for (const auto& c : oracle::t_cases()) {
    CAPTURE(c.x);
    CHECK(std::abs(student_t_cdf(c.x, c.df1) - oracle::t_cdf_by_quadrature(c.x, c.df1)) < 1e-8);
  }
  for (const auto& c : oracle::f_cases()) {
    CAPTURE(c.x);
    CHECK(std::abs(f_cdf(c.x, c.df1, c.df2) - oracle::f_cdf_by_quadrature(c.x, c.df1, c.df2)) < 1e-8);
  }
  for (const auto& c : oracle::chi2_cases()) {
    CAPTURE(c.x);
    CHECK(std::abs(chi2_cdf(c.x, c.df1) - oracle::chi2_cdf_by_quadrature(c.x, c.df1)) < 1e-8);
  }
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(std::abs(normal_cdf(1.959963984540054) - 0.975) < 1e-12);
}
