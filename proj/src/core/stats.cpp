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

#include "longipet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "longipet/error.hpp"

namespace longipet::stats {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

// Continued fraction for I_x(a, b), valid for x < (a + 1) / (a + b + 2).
double beta_cf(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  fail(ErrorKind::kDegenerate, "incomplete beta continued fraction did not converge");
}

// Upper regularized gamma Q(a, x) by continued fraction, x >= a + 1.
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  fail(ErrorKind::kDegenerate, "incomplete gamma continued fraction did not converge");
}

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 1; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  fail(ErrorKind::kDegenerate, "incomplete gamma series did not converge");
}

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

// Two-sided Student t tail P(|T| >= |t|).
double t_two_sided(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  if (!std::isfinite(f)) return 0.0;
  return incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) check(std::isfinite(x), ErrorKind::kInput, std::string(what) + " contains non-finite values");
}

// Average ranks (1-based) of |d|, plus the tie-group sizes.
std::vector<double> abs_ranks(const std::vector<double>& d, std::vector<std::size_t>* ties) {
  const std::size_t n = d.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[idx[j + 1]]) == std::abs(d[idx[i]])) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    if (ties) ties->push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

struct SignedRanks {
  double w_plus = 0.0;
  double w_minus = 0.0;
};

SignedRanks signed_ranks(const std::vector<double>& d, const std::vector<double>& ranks) {
  SignedRanks s;
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? s.w_plus : s.w_minus) += ranks[i];
  return s;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double incomplete_beta(double a, double b, double x) {
  check(a > 0.0 && b > 0.0, ErrorKind::kParameter, "incomplete beta needs a, b > 0");
  check(x >= 0.0 && x <= 1.0, ErrorKind::kParameter, "incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double incomplete_gamma_p(double a, double x) {
  check(a > 0.0, ErrorKind::kParameter, "incomplete gamma needs a > 0");
  check(x >= 0.0, ErrorKind::kParameter, "incomplete gamma needs x >= 0");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double student_t_cdf(double t, double df) {
  check(df > 0.0, ErrorKind::kParameter, "t distribution needs df > 0");
  const double tail = 0.5 * t_two_sided(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

double f_cdf(double f, double df1, double df2) {
  check(df1 > 0.0 && df2 > 0.0, ErrorKind::kParameter, "F distribution needs positive df");
  if (f <= 0.0) return 0.0;
  return incomplete_beta(0.5 * df1, 0.5 * df2, df1 * f / (df1 * f + df2));
}

double chi2_cdf(double x, double df) {
  check(df > 0.0, ErrorKind::kParameter, "chi-square distribution needs df > 0");
  if (x <= 0.0) return 0.0;
  return incomplete_gamma_p(0.5 * df, 0.5 * x);
}

double wilcoxon_exact_p(const std::vector<double>& d) {
  check(!d.empty(), ErrorKind::kDegenerate, "no nonzero differences");
  const std::vector<double> ranks = abs_ranks(d, nullptr);
  // Doubled ranks are integers even with average ties.
  std::vector<int> r2(ranks.size());
  int total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    r2[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    total += r2[i];
  }
  const SignedRanks s = signed_ranks(d, ranks);
  const int w2 = static_cast<int>(std::lround(2.0 * std::min(s.w_plus, s.w_minus)));
  // count[v]: sign patterns whose doubled W+ equals v.
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  int reach = 0;
  for (int r : r2) {
    for (int v = reach; v >= 0; --v) count[v + r] += count[v];
    reach += r;
  }
  double below = 0.0;
  for (int v = 0; v <= w2; ++v) below += count[v];
  return std::min(1.0, 2.0 * below / std::ldexp(1.0, static_cast<int>(d.size())));
}

double wilcoxon_normal_p(const std::vector<double>& d) {
  check(!d.empty(), ErrorKind::kDegenerate, "no nonzero differences");
  std::vector<std::size_t> ties;
  const std::vector<double> ranks = abs_ranks(d, &ties);
  const SignedRanks s = signed_ranks(d, ranks);
  const double n = static_cast<double>(d.size());
  const double w = std::min(s.w_plus, s.w_minus);
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  for (std::size_t t : ties) {
    const double tt = static_cast<double>(t);
    var -= (tt * tt * tt - tt) / 48.0;
  }
  if (var <= 0.0) return 1.0;
  const double z = std::min(0.0, (w - mean + 0.5) / std::sqrt(var));
  return std::min(1.0, 2.0 * normal_cdf(z));
}

TestResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
  check(x.size() == y.size(), ErrorKind::kInput, "wilcoxon needs paired samples of equal length");
  check(!x.empty(), ErrorKind::kInput, "wilcoxon needs at least one pair");
  require_finite(x, "wilcoxon x");
  require_finite(y, "wilcoxon y");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] - y[i] != 0.0) d.push_back(x[i] - y[i]);
  }
  if (d.empty()) fail(ErrorKind::kDegenerate, "wilcoxon: every paired difference is zero");
  const SignedRanks s = signed_ranks(d, abs_ranks(d, nullptr));
  TestResult r;
  r.statistic = "W";
  r.value = std::min(s.w_plus, s.w_minus);
  r.n = d.size();
  r.p = clamp01(d.size() <= kWilcoxonExactMax ? wilcoxon_exact_p(d) : wilcoxon_normal_p(d));
  return r;
}

TestResult paired_t(const std::vector<double>& x, const std::vector<double>& y) {
  check(x.size() == y.size(), ErrorKind::kInput, "paired t needs samples of equal length");
  check(x.size() >= 2, ErrorKind::kInput, "paired t needs at least two pairs");
  require_finite(x, "paired t x");
  require_finite(y, "paired t y");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += x[i] - y[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
  if (ss <= 0.0) fail(ErrorKind::kDegenerate, "paired t: differences have zero variance");
  const double sd = std::sqrt(ss / (n - 1.0));
  TestResult r;
  r.statistic = "t";
  r.value = mean / (sd / std::sqrt(n));
  r.df = n - 1.0;
  r.n = x.size();
  r.p = clamp01(t_two_sided(r.value, r.df));
  return r;
}

TestResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  check(groups.size() >= 2, ErrorKind::kInput, "ANOVA needs at least two groups");
  double grand = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    check(g.size() >= 2, ErrorKind::kInput, "ANOVA needs at least two values per group");
    require_finite(g, "ANOVA group");
    for (double v : g) grand += v;
    n += g.size();
  }
  grand /= static_cast<double>(n);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  TestResult r;
  r.statistic = "F";
  r.df = static_cast<double>(groups.size() - 1);
  r.df2 = static_cast<double>(n - groups.size());
  r.n = n;
  if (ssw <= 0.0) {
    if (ssb <= 0.0) fail(ErrorKind::kDegenerate, "ANOVA: no variance within or between groups");
    r.value = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.value = (ssb / r.df) / (ssw / r.df2);
  r.p = clamp01(f_sf(r.value, r.df, r.df2));
  return r;
}

TestResult chi_square_independence(const std::vector<std::vector<double>>& table) {
  check(table.size() >= 2, ErrorKind::kInput, "chi-square needs at least two rows");
  const std::size_t cols = table.front().size();
  check(cols >= 2, ErrorKind::kInput, "chi-square needs at least two columns");
  std::vector<double> row(table.size(), 0.0), col(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    check(table[i].size() == cols, ErrorKind::kInput, "chi-square table is ragged");
    for (std::size_t j = 0; j < cols; ++j) {
      const double o = table[i][j];
      check(std::isfinite(o) && o >= 0.0, ErrorKind::kInput, "chi-square counts must be finite and >= 0");
      row[i] += o;
      col[j] += o;
      total += o;
    }
  }
  for (double m : row) check(m > 0.0, ErrorKind::kDegenerate, "chi-square: a row total is zero");
  for (double m : col) check(m > 0.0, ErrorKind::kDegenerate, "chi-square: a column total is zero");
  double chi2 = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = row[i] * col[j] / total;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  TestResult r;
  r.statistic = "chi2";
  r.value = chi2;
  r.df = static_cast<double>((table.size() - 1) * (cols - 1));
  r.n = static_cast<std::size_t>(std::llround(total));
  r.p = clamp01(gamma_q(0.5 * r.df, 0.5 * chi2));
  return r;
}

MixedAnovaResult mixed_anova(const std::vector<std::vector<double>>& values, const std::vector<int>& group) {
  check(values.size() == group.size(), ErrorKind::kInput, "mixed ANOVA: one group label per subject required");
  check(!values.empty(), ErrorKind::kInput, "mixed ANOVA needs subjects");
  const std::size_t levels = values.front().size();
  check(levels >= 2, ErrorKind::kInput, "mixed ANOVA needs at least two within-subject levels");
  for (const auto& v : values) {
    if (v.size() != levels) fail(ErrorKind::kInput, "mixed ANOVA: incomplete design (missing within-subject levels)");
    require_finite(v, "mixed ANOVA values");
  }
  std::vector<int> labels(group);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const std::size_t g = labels.size();
  const std::size_t n = values.size();
  check(g >= 2, ErrorKind::kInput, "mixed ANOVA needs at least two groups");
  check(n > g, ErrorKind::kInput, "mixed ANOVA needs more subjects than groups");
  auto gi = [&](std::size_t s) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), group[s]) - labels.begin());
  };

  const double nl = static_cast<double>(levels);
  std::vector<double> subj_mean(n, 0.0), level_mean(levels, 0.0), group_mean(g, 0.0), group_n(g, 0.0);
  std::vector<std::vector<double>> cell(g, std::vector<double>(levels, 0.0));
  double grand = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t a = gi(s);
    group_n[a] += 1.0;
    for (std::size_t b = 0; b < levels; ++b) {
      const double x = values[s][b];
      subj_mean[s] += x / nl;
      level_mean[b] += x;
      cell[a][b] += x;
      grand += x;
    }
  }
  grand /= static_cast<double>(n) * nl;
  for (std::size_t b = 0; b < levels; ++b) level_mean[b] /= static_cast<double>(n);
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t b = 0; b < levels; ++b) {
      cell[a][b] /= group_n[a];
      group_mean[a] += cell[a][b] / nl;
    }
  }

  MixedAnovaResult r;
  for (std::size_t a = 0; a < g; ++a) r.ss_between += nl * group_n[a] * (group_mean[a] - grand) * (group_mean[a] - grand);
  for (std::size_t s = 0; s < n; ++s) {
    const double dev = subj_mean[s] - group_mean[gi(s)];
    r.ss_subjects += nl * dev * dev;
  }
  for (std::size_t b = 0; b < levels; ++b) {
    r.ss_within += static_cast<double>(n) * (level_mean[b] - grand) * (level_mean[b] - grand);
  }
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = 0; b < levels; ++b) {
      const double dev = cell[a][b] - group_mean[a] - level_mean[b] + grand;
      r.ss_interaction += group_n[a] * dev * dev;
    }
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t a = gi(s);
    for (std::size_t b = 0; b < levels; ++b) {
      const double dev = values[s][b] - subj_mean[s] - cell[a][b] + group_mean[a];
      r.ss_error_within += dev * dev;
      r.ss_total += (values[s][b] - grand) * (values[s][b] - grand);
    }
  }

  const double df_a = static_cast<double>(g - 1);
  const double df_sa = static_cast<double>(n - g);
  const double df_b = nl - 1.0;
  const double df_ab = df_a * df_b;
  const double df_err = df_sa * df_b;
  auto f_test = [&](double ss, double df, double ss_err, double df_e) {
    TestResult t;
    t.statistic = "F";
    t.df = df;
    t.df2 = df_e;
    t.n = n;
    const double ms = ss / df;
    const double ms_err = ss_err / df_e;
    // Relative threshold: sums of squares of identical values can be tiny
    // nonzero rounding residue.
    const double scale = std::max(r.ss_total, 1.0) * 1e-24;
    if (ss <= scale) {
      t.value = 0.0;
      t.p = 1.0;
    } else if (ss_err <= scale) {
      t.value = std::numeric_limits<double>::infinity();
      t.p = 0.0;
    } else {
      t.value = ms / ms_err;
      t.p = clamp01(f_sf(t.value, df, df_e));
    }
    return t;
  };
  r.between = f_test(r.ss_between, df_a, r.ss_subjects, df_sa);
  r.within = f_test(r.ss_within, df_b, r.ss_error_within, df_err);
  r.interaction = f_test(r.ss_interaction, df_ab, r.ss_error_within, df_err);
  return r;
}

double bonferroni(double alpha, int m) {
  check(m >= 1, ErrorKind::kParameter, "bonferroni needs m >= 1");
  check(alpha > 0.0 && alpha <= 1.0, ErrorKind::kParameter, "alpha must be in (0, 1]");
  return alpha / static_cast<double>(m);
}

}  // namespace longipet::stats
