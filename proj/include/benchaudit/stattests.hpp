#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "benchaudit/aggregate.hpp"
#include "benchaudit/errors.hpp"

namespace benchaudit {

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

namespace detail {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 500;

// Lower regularized incomplete gamma P(a, x) by series expansion,
// P(a,x) = x^a e^-x / Gamma(a+1) * sum_{n>=0} x^n / ((a+1)...(a+n)).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by the continued fraction
// x^a e^-x / Gamma(a) * 1/(x+1-a- 1(1-a)/(x+3-a- ...)), evaluated by the
// modified Lentz method.
inline double gamma_q_contfrac(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kGammaMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace detail

// Chi-square survival function 1 - P(dof/2, x/2). The series branch serves
// x < dof + 1, the continued fraction the rest; both converge to well under
// the documented 1e-10 absolute accuracy there.
inline double chi2_sf(double x, unsigned dof) {
  if (!(x >= 0.0))
    throw ValidationError(ValidationKind::OutOfRange,
                          "chi2_sf requires x >= 0");
  if (dof == 0)
    throw ValidationError(ValidationKind::OutOfRange,
                          "chi2_sf requires dof >= 1");
  if (x == 0.0) return 1.0;
  const double a = static_cast<double>(dof) / 2.0;
  const double t = x / 2.0;
  if (x < static_cast<double>(dof) + 1.0)
    return 1.0 - detail::gamma_p_series(a, t);
  return detail::gamma_q_contfrac(a, t);
}

// Exact binomial row C(n, 0..n) for n <= 62; every entry and the row sum
// 2^n stay inside uint64, so downstream checks can be integer-exact.
inline std::vector<std::uint64_t> binomial_row_exact(unsigned n) {
  if (n > 62)
    throw ValidationError(ValidationKind::OutOfRange,
                          "binomial_row_exact supports n <= 62");
  std::vector<std::uint64_t> row(n + 1, 0);
  row[0] = 1;
  for (unsigned i = 1; i <= n; ++i)
    for (unsigned j = i; j > 0; --j) row[j] += row[j - 1];
  return row;
}

// P(X >= a) for X ~ Binomial(n, 1/2), summed exactly in extended precision.
// The probability recurrence P(i+1) = P(i) (n-i)/(i+1) starts from 2^-n,
// which an 80-bit long double represents down to n = 1024.
inline double binomial_tail(unsigned n, unsigned a) {
  if (n < 1 || n > 1024)
    throw ValidationError(ValidationKind::OutOfRange,
                          "binomial_tail requires 1 <= n <= 1024");
  if (a > n)
    throw ValidationError(ValidationKind::OutOfRange,
                          "binomial_tail requires a <= n");
  long double p = std::exp2l(-static_cast<long double>(n)); // P(X = 0)
  long double tail = (a == 0) ? p : 0.0L;
  for (unsigned i = 0; i < n; ++i) {
    p *= static_cast<long double>(n - i);
    p /= static_cast<long double>(i + 1);
    if (i + 1 >= a) tail += p;
  }
  return static_cast<double>(tail);
}

// ---------------------------------------------------------------------------
// Friedman omnibus test
// ---------------------------------------------------------------------------

struct FriedmanReport {
  std::size_t n_datasets = 0; // N
  std::size_t n_models = 0;   // k
  std::vector<std::string> models;
  std::vector<double> avg_ranks; // R_j, aligned with models when named
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  bool small_sample_warning = false; // rule-of-thumb region N <= 10 or k <= 5
  bool p_clamped = false;            // p fell below 1e-300 and was zeroed
};

// values: N rows (datasets) x k columns (models).
// chi2_F = (12N / k(k+1)) [sum_j R_j^2 - k(k+1)^2/4], dof = k - 1.
inline FriedmanReport friedman(const std::vector<std::vector<double>> &values,
                               std::vector<std::string> models = {}) {
  const std::size_t n = values.size();
  if (n < 2)
    throw ValidationError(ValidationKind::DegenerateShape,
                          "friedman requires at least 2 datasets");
  const std::size_t k = values.front().size();
  if (k < 2)
    throw ValidationError(ValidationKind::DegenerateShape,
                          "friedman requires at least 2 models");
  for (const auto &row : values)
    if (row.size() != k)
      throw ValidationError(ValidationKind::IncompleteMatrix,
                            "friedman matrix has ragged rows");
  if (!models.empty() && models.size() != k)
    throw ValidationError(ValidationKind::LengthMismatch,
                          "model-name list does not match matrix width");

  FriedmanReport report;
  report.n_datasets = n;
  report.n_models = k;
  report.models = std::move(models);
  report.avg_ranks.assign(k, 0.0);
  for (const auto &row : values) {
    const auto ranks = rank_with_ties(row);
    for (std::size_t j = 0; j < k; ++j) report.avg_ranks[j] += ranks[j];
  }
  for (auto &r : report.avg_ranks) r /= static_cast<double>(n);

  double sum_sq = 0.0;
  for (double r : report.avg_ranks) sum_sq += r * r;
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  report.chi2 =
      12.0 * nd / (kd * (kd + 1.0)) * (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  if (report.chi2 < 0.0) report.chi2 = 0.0; // guard rounding at the all-equal point
  report.dof = k - 1;
  report.p_value = chi2_sf(report.chi2, static_cast<unsigned>(report.dof));
  if (report.p_value < 1e-300) {
    report.p_value = 0.0;
    report.p_clamped = true;
  }
  report.small_sample_warning = (n <= 10 || k <= 5);
  return report;
}

// Rows = datasets, columns = models, matching the table layout.
inline FriedmanReport friedman(const AggregatedTable &table) {
  std::vector<std::vector<double>> values(
      table.datasets.size(), std::vector<double>(table.models.size()));
  for (std::size_t di = 0; di < table.datasets.size(); ++di)
    for (std::size_t mi = 0; mi < table.models.size(); ++mi)
      values[di][mi] = table.values[mi][di];
  return friedman(values, table.models);
}

// ---------------------------------------------------------------------------
// Exact sign test
// ---------------------------------------------------------------------------

struct SignTestReport {
  double wins_a = 0.0;
  double wins_b = 0.0;
  std::size_t ties_raw = 0;
  std::size_t n_effective = 0;
  double p_one_sided = 0.0; // P(X >= wins_a) under Binomial(n_effective, 1/2)
  double p_two_sided = 0.0; // min(1, 2 * smaller tail); the headline value
};

// Wins are strict inequalities (lower error wins). Ties are split evenly
// between the two sides; an odd tie count first discards one tie, so the
// split stays integral and n_effective = n - (ties odd ? 1 : 0).
inline SignTestReport sign_test(const std::vector<double> &a,
                                const std::vector<double> &b) {
  if (a.size() != b.size())
    throw ValidationError(ValidationKind::LengthMismatch,
                          "sign_test requires equal-length vectors");
  if (a.empty())
    throw ValidationError(ValidationKind::DegenerateShape,
                          "sign_test requires at least one pair");
  std::size_t wins_a = 0, wins_b = 0, ties = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i])
      ++wins_a;
    else if (b[i] < a[i])
      ++wins_b;
    else
      ++ties;
  }
  const std::size_t kept_ties = ties - (ties % 2);
  SignTestReport report;
  report.ties_raw = ties;
  report.n_effective = a.size() - (ties % 2);
  report.wins_a = static_cast<double>(wins_a + kept_ties / 2);
  report.wins_b = static_cast<double>(wins_b + kept_ties / 2);

  if (report.n_effective == 0) { // a single discarded tie: no information
    report.p_one_sided = 1.0;
    report.p_two_sided = 1.0;
    return report;
  }
  const unsigned n = static_cast<unsigned>(report.n_effective);
  const unsigned wa = static_cast<unsigned>(report.wins_a);
  report.p_one_sided = binomial_tail(n, wa);
  // Under p = 1/2 the distribution is symmetric: P(X <= wa) = P(X >= n - wa).
  const double upper = report.p_one_sided;
  const double lower = binomial_tail(n, n - wa);
  report.p_two_sided = std::min(1.0, 2.0 * std::min(upper, lower));
  return report;
}

} // namespace benchaudit
