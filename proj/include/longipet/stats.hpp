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

#ifndef LONGIPET_STATS_HPP_
#define LONGIPET_STATS_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace longipet::stats {

struct TestResult {
  std::string statistic;  // "W", "t", "F" or "chi2"
  double value = 0.0;
  double p = 1.0;
  double df = 0.0;   // 0 when not applicable
  double df2 = 0.0;  // denominator df of F tests
  std::size_t n = 0;
};

// Distribution functions.
double normal_cdf(double z);
double log_beta(double a, double b);
// Regularized incomplete beta I_x(a, b) via a modified Lentz continued fraction.
double incomplete_beta(double a, double b, double x);
// Regularized lower incomplete gamma P(a, x): series below a + 1, continued
// fraction above.
double incomplete_gamma_p(double a, double x);
double student_t_cdf(double t, double df);
double f_cdf(double f, double df1, double df2);
double chi2_cdf(double x, double df);

// Two-sided signed-rank test on x - y. Zero differences are dropped, ties get
// average ranks, W = min(W+, W-). Exact p (enumeration of sign patterns, by
// dynamic programming) for n <= 25, otherwise the normal approximation with
// tie and continuity correction. p = min(1, 2 P(W+ <= W)).
TestResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y);
inline constexpr std::size_t kWilcoxonExactMax = 25;
// Exact two-sided p of the nonzero differences `d`, for any n.
double wilcoxon_exact_p(const std::vector<double>& d);
double wilcoxon_normal_p(const std::vector<double>& d);

TestResult paired_t(const std::vector<double>& x, const std::vector<double>& y);
TestResult one_way_anova(const std::vector<std::vector<double>>& groups);
TestResult chi_square_independence(const std::vector<std::vector<double>>& table);

// Split-plot ANOVA: one between-subject factor (group) and one within-subject
// factor (level). values[s][b] is subject s at level b.
struct MixedAnovaResult {
  TestResult between;      // group, error = subjects within groups
  TestResult within;       // level, error = level x subjects within groups
  TestResult interaction;  // group x level, same error
  double ss_between = 0.0;
  double ss_subjects = 0.0;
  double ss_within = 0.0;
  double ss_interaction = 0.0;
  double ss_error_within = 0.0;
  double ss_total = 0.0;
};
MixedAnovaResult mixed_anova(const std::vector<std::vector<double>>& values, const std::vector<int>& group);

double bonferroni(double alpha, int m);

}  // namespace longipet::stats

#endif  // LONGIPET_STATS_HPP_
