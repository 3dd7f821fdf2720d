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

// Independent reference computations for the statistics module: brute-force
// sign enumeration, numerical integration of densities, and definitional
// split-plot sums of squares.

#ifndef LONGIPET_TESTS_STATS_ORACLES_HPP_
#define LONGIPET_TESTS_STATS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace longipet::testing {

// Average ranks of |d| (1-based).
inline std::vector<double> average_abs_ranks(const std::vector<double>& d) {
  const std::size_t n = d.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++below;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    ranks[i] = below + (equal + 1.0) / 2.0;
  }
  return ranks;
}

// Two-sided exact signed-rank p by visiting all 2^n sign patterns.
inline double wilcoxon_enumeration_p(const std::vector<double>& d) {
  const std::size_t n = d.size();
  const std::vector<double> r = average_abs_ranks(d);
  double w_plus = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += r[i];
    if (d[i] > 0) w_plus += r[i];
  }
  const double w = std::min(w_plus, total - w_plus);
  unsigned long long hits = 0;
  for (unsigned long long mask = 0; mask < (1ull << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1ull) s += r[i];
    if (s <= w) ++hits;
  }
  return std::min(1.0, 2.0 * static_cast<double>(hits) / static_cast<double>(1ull << n));
}

inline double integrate(const std::function<double(double)>& f, double a, double b) {
  static thread_local boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b);
}

inline double t_cdf_by_quadrature(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  if (t == 0) return 0.5;
  const double half = integrate(pdf, 0.0, std::abs(t));
  return t > 0 ? 0.5 + half : 0.5 - half;
}

inline double f_cdf_by_quadrature(double x, double d1, double d2) {
  const double lc = 0.5 * d1 * std::log(d1 / d2) + std::lgamma((d1 + d2) / 2) - std::lgamma(d1 / 2) -
                    std::lgamma(d2 / 2);
  auto pdf = [&](double u) {
    if (u <= 0) return 0.0;
    return std::exp(lc + (d1 / 2 - 1) * std::log(u) - (d1 + d2) / 2 * std::log1p(d1 * u / d2));
  };
  return integrate(pdf, 0.0, x);
}

inline double chi2_cdf_by_quadrature(double x, double k) {
  const double lc = -(k / 2) * std::log(2.0) - std::lgamma(k / 2);
  auto pdf = [&](double u) {
    if (u <= 0) return 0.0;
    return std::exp(lc + (k / 2 - 1) * std::log(u) - u / 2);
  };
  return integrate(pdf, 0.0, x);
}

struct SplitPlotSums {
  double between = 0, subjects = 0, level = 0, interaction = 0, error = 0, total = 0;
};

// Every term is a sum over all observations of a squared cell-mean contrast.
inline SplitPlotSums split_plot_sums(const std::vector<std::vector<double>>& y, const std::vector<int>& group) {
  const std::size_t n = y.size(), b = y[0].size();
  auto mean_where = [&](auto pred_s, auto pred_b) {
    double s = 0, c = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < b; ++j)
        if (pred_s(i) && pred_b(j)) {
          s += y[i][j];
          ++c;
        }
    return s / c;
  };
  auto any = [](std::size_t) { return true; };
  const double grand = mean_where(any, any);
  SplitPlotSums out;
  for (std::size_t i = 0; i < n; ++i) {
    auto same_group = [&](std::size_t k) { return group[k] == group[i]; };
    auto this_subject = [&](std::size_t k) { return k == i; };
    const double mg = mean_where(same_group, any);
    const double ms = mean_where(this_subject, any);
    for (std::size_t j = 0; j < b; ++j) {
      auto this_level = [&](std::size_t l) { return l == j; };
      const double ml = mean_where(any, this_level);
      const double mc = mean_where(same_group, this_level);
      out.between += (mg - grand) * (mg - grand);
      out.subjects += (ms - mg) * (ms - mg);
      out.level += (ml - grand) * (ml - grand);
      out.interaction += (mc - mg - ml + grand) * (mc - mg - ml + grand);
      out.error += (y[i][j] - ms - mc + mg) * (y[i][j] - ms - mc + mg);
      out.total += (y[i][j] - grand) * (y[i][j] - grand);
    }
  }
  return out;
}

// Fixed evaluation points shared by the unit tests and the acceptance gate.
struct CdfCase {
  double x, df1, df2;
};

inline std::vector<CdfCase> t_cases() {
  std::vector<CdfCase> c;
  const double xs[] = {-4.5, -2.2, -1.0, -0.3, 0.0, 0.4, 1.3, 2.0, 3.1, 6.0};
  for (int i = 0; i < 20; ++i) c.push_back({xs[i % 10], i < 10 ? 3.0 : 17.5, 0});
  return c;
}

inline std::vector<CdfCase> f_cases() {
  std::vector<CdfCase> c;
  const double xs[] = {0.05, 0.3, 0.8, 1.0, 1.7, 2.5, 3.9, 5.5, 9.0, 15.0};
  for (int i = 0; i < 20; ++i) c.push_back({xs[i % 10], i < 10 ? 1.0 : 4.0, i < 10 ? 12.0 : 30.0});
  return c;
}

inline std::vector<CdfCase> chi2_cases() {
  std::vector<CdfCase> c;
  const double xs[] = {0.1, 0.5, 1.0, 2.0, 3.84, 5.0, 7.5, 10.0, 14.0, 22.0};
  for (int i = 0; i < 20; ++i) c.push_back({xs[i % 10], i < 10 ? 1.0 : 6.0, 0});
  return c;
}

}  // namespace longipet::testing

#endif  // LONGIPET_TESTS_STATS_ORACLES_HPP_
