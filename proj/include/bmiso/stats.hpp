#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bmiso/errors.hpp"

namespace bmiso {

// Regularized incomplete gamma Q(a, x) by series / continued fraction,
// good to ~1e-10 over the chi-square range used here.
inline double gamma_q(double a, double x) {
  require(a > 0.0 && x >= 0.0, ErrorCode::DomainError, "gamma_q domain");
  if (x == 0.0) return 1.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x), return 1 - P.
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q(a, x).
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, f = d;
  for (int i = 1; i < 500; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    f *= del;
    if (std::fabs(del - 1.0) < 1e-14) break;
  }
  return f * std::exp(-x + a * std::log(x) - gln);
}

inline double chi_square_pvalue(double stat, double dof) {
  if (dof <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * stat);
}

// Kolmogorov limit law Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 0.1) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
  std::size_t n = 0;
};

// One-sample KS against an arbitrary CDF, finite-n corrected
// (Stephens): p = Q(D (sqrt(n) + 0.12 + 0.11 / sqrt(n))).
inline KsResult ks_test(std::vector<double> xs,
                        const std::function<double(double)>& cdf) {
  require(xs.size() >= 30, ErrorCode::TooFewSamples,
          "KS needs at least 30 samples");
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max(d, std::fabs((i + 1) / n - f));
    d = std::max(d, std::fabs(f - i / n));
  }
  double lambda = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  return {d, kolmogorov_q(lambda), xs.size()};
}

inline KsResult ks_uniform_test(const std::vector<double>& xs) {
  for (double x : xs)
    require(x >= 0.0 && x <= 1.0, ErrorCode::DomainError,
            "uniform KS sample outside [0,1]");
  return ks_test(xs, [](double x) { return x; });
}

inline KsResult ks_exponential_test(const std::vector<double>& xs,
                                    double rate) {
  require(rate > 0.0, ErrorCode::DomainError, "rate must be positive");
  return ks_test(xs, [rate](double x) {
    return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
  });
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(a.size() >= 30 && b.size() >= 30, ErrorCode::TooFewSamples,
          "two-sample KS needs at least 30 each");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  // Tied values advance both counters before D is measured, otherwise heavy
  // ties (lattice data) inflate the statistic.
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  double ne = double(a.size()) * b.size() / (a.size() + b.size());
  double lambda = d * (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne));
  return {d, kolmogorov_q(lambda), a.size() + b.size()};
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double pvalue = 1.0;
};

// Goodness of fit with deterministic left-to-right pooling of cells whose
// expected count is below 5.
inline ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                                      const std::vector<double>& expected,
                                      int estimated_params = 0) {
  require(observed.size() == expected.size(), ErrorCode::LengthMismatch,
          "observed/expected size mismatch");
  require(!observed.empty(), ErrorCode::EmptySample, "no cells");
  std::vector<double> obs, exp;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= 5.0) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    require(exp[i] > 0.0, ErrorCode::DomainError, "zero expected count");
    double d = obs[i] - exp[i];
    stat += d * d / exp[i];
  }
  double dof = static_cast<double>(obs.size()) - 1.0 - estimated_params;
  return {stat, dof, chi_square_pvalue(stat, dof)};
}

// Independence test on a contingency table (rows x cols).
inline ChiSquareResult chi_square_independence(
    const std::vector<std::vector<double>>& table) {
  require(!table.empty() && !table[0].empty(), ErrorCode::EmptySample,
          "empty table");
  std::size_t r = table.size(), c = table[0].size();
  std::vector<double> row(r, 0.0), col(c, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    require(table[i].size() == c, ErrorCode::LengthMismatch, "ragged table");
    for (std::size_t j = 0; j < c; ++j) {
      row[i] += table[i][j];
      col[j] += table[i][j];
      total += table[i][j];
    }
  }
  require(total > 0.0, ErrorCode::EmptySample, "all-zero table");
  double stat = 0.0;
  std::size_t live_rows = 0, live_cols = 0;
  for (std::size_t i = 0; i < r; ++i)
    if (row[i] > 0.0) ++live_rows;
  for (std::size_t j = 0; j < c; ++j)
    if (col[j] > 0.0) ++live_cols;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      if (row[i] == 0.0 || col[j] == 0.0) continue;
      double e = row[i] * col[j] / total;
      double d = table[i][j] - e;
      stat += d * d / e;
    }
  double dof = static_cast<double>(live_rows - 1) * (live_cols - 1);
  return {stat, dof, chi_square_pvalue(stat, dof)};
}

struct MeanResult {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t n = 0;
};

inline MeanResult sample_mean(const std::vector<double>& xs) {
  require(!xs.empty(), ErrorCode::EmptySample, "mean of nothing");
  double s = 0.0;
  for (double x : xs) s += x;
  double mean = s / xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - mean) * (x - mean);
  double stderr_mean =
      xs.size() > 1 ? std::sqrt(v / (xs.size() - 1.0) / xs.size()) : 0.0;
  return {mean, stderr_mean, xs.size()};
}

// Lag-1 Pearson correlation; under independence its null sd is 1/sqrt(n).
struct SerialCorrResult {
  double corr = 0.0;
  double zscore = 0.0;
  std::size_t n = 0;
};

inline SerialCorrResult lag1_correlation(const std::vector<double>& xs) {
  require(xs.size() >= 31, ErrorCode::TooFewSamples, "need 31+ samples");
  std::size_t n = xs.size() - 1;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += xs[i + 1];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = xs[i] - mx, b = xs[i + 1] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  require(sxx > 0 && syy > 0, ErrorCode::DomainError,
          "degenerate series in correlation");
  double r = sxy / std::sqrt(sxx * syy);
  return {r, r * std::sqrt(static_cast<double>(n)), n};
}

// Row-normalized empirical transition matrix of an integer sequence.
struct TransitionEstimate {
  std::vector<std::vector<double>> prob;
  std::vector<std::vector<long>> count;
  std::vector<long> row_total;
  std::size_t transitions = 0;
};

inline TransitionEstimate estimate_transition_matrix(
    const std::vector<int>& seq, int n_states) {
  require(n_states >= 1, ErrorCode::DomainError, "need states");
  require(seq.size() >= 2, ErrorCode::TooFewSamples,
          "need at least one transition");
  TransitionEstimate est;
  est.count.assign(n_states, std::vector<long>(n_states, 0));
  est.row_total.assign(n_states, 0);
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    require(seq[i] >= 0 && seq[i] < n_states && seq[i + 1] >= 0 &&
                seq[i + 1] < n_states,
            ErrorCode::DomainError, "state outside range");
    est.count[seq[i]][seq[i + 1]]++;
    est.row_total[seq[i]]++;
    est.transitions++;
  }
  est.prob.assign(n_states, std::vector<double>(n_states, 0.0));
  for (int i = 0; i < n_states; ++i)
    if (est.row_total[i] > 0)
      for (int j = 0; j < n_states; ++j)
        est.prob[i][j] = double(est.count[i][j]) / est.row_total[i];
  return est;
}

}  // namespace bmiso
