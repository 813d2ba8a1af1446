#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dsb/errors.hpp"

namespace dsb {

struct MeanStderr {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t n = 0;
};

// Two-pass mean and standard error, folded in index order.
inline MeanStderr mean_stderr(const std::vector<double>& samples) {
  MeanStderr out;
  out.n = samples.size();
  if (samples.empty()) return out;
  double sum = 0.0;
  for (double v : samples) sum += v;
  out.mean = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return out;
  double sq = 0.0;
  for (double v : samples) sq += (v - out.mean) * (v - out.mean);
  const double var = sq / static_cast<double>(samples.size() - 1);
  out.stderr_of_mean = std::sqrt(var / static_cast<double>(samples.size()));
  return out;
}

// --- Kolmogorov-Smirnov ------------------------------------------------------

// One-sample two-sided KS statistic against a continuous c.d.f.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw input_error("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = f - static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n - f;
    d = std::max(d, std::max(lo, hi));
  }
  return d;
}

// Asymptotic p-value via the Kolmogorov distribution
// Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2), lambda = sqrt(n) D.
// The asymptotic form is only trusted for n >= 1000.
inline double ks_asymptotic_pvalue(double d, std::size_t n) {
  if (n < 1000)
    throw input_error("ks_asymptotic_pvalue: asymptotic distribution requires n >= 1000");
  const double lambda = std::sqrt(static_cast<double>(n)) * d;
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) *
                                 lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-14) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// --- Regularized incomplete beta and the exact binomial interval ---------------

namespace detail {

// Lentz continued fraction for the incomplete beta; standard formulation.
inline double incbeta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double md = static_cast<double>(m);
    double aa = md * (b - md) * x / ((qam + 2.0 * md) * (a + 2.0 * md));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + 2.0 * md) * (qap + 2.0 * md));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw input_error("regularized_incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) -
                           (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::incbeta_cf(a, b, x) / a;
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) -
                        (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b))) *
                   detail::incbeta_cf(b, a, 1.0 - x) / b;
}

// Inverse of I_x(a, b) in x by bisection.
inline double incbeta_inverse(double a, double b, double p) {
  if (!(p >= 0.0) || !(p <= 1.0)) throw input_error("incbeta_inverse: p must lie in [0,1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_incomplete_beta(a, b, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct BinomialCI {
  double lower = 0.0;
  double upper = 1.0;
};

// Exact Clopper-Pearson interval at confidence 1 - level.
inline BinomialCI clopper_pearson(std::size_t hits, std::size_t n, double level = 0.05) {
  if (n == 0) throw input_error("clopper_pearson: n must be > 0");
  if (hits > n) throw input_error("clopper_pearson: hits > n");
  const double k = static_cast<double>(hits);
  const double nn = static_cast<double>(n);
  BinomialCI ci;
  ci.lower = hits == 0 ? 0.0 : incbeta_inverse(k, nn - k + 1.0, level / 2.0);
  ci.upper = hits == n ? 1.0 : incbeta_inverse(k + 1.0, nn - k, 1.0 - level / 2.0);
  return ci;
}

// --- Correlation ---------------------------------------------------------------

// Sample Pearson correlation. Bitwise-identical inputs short-circuit to 1:
// the probe contract wants rho(x, x) = 1 exactly, which sqrt rounding would
// otherwise miss by an ulp. Constant samples are degenerate even when equal.
inline double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw input_error("pearson_correlation: need two samples of equal size >= 2");
  if (a == b) {
    for (double v : a) {
      if (v != a.front()) return 1.0;
    }
    throw probe_error("pearson_correlation: degenerate variance");
  }
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0))
    throw probe_error("pearson_correlation: degenerate variance");
  return sab / std::sqrt(saa * sbb);
}

// Leave-one-out jackknife standard error of the correlation, O(n) via sums.
inline double jackknife_correlation_stderr(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 3) throw input_error("jackknife: need n >= 3 paired samples");
  double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  std::vector<double> loo(n);
  const double m = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double ta = sa - a[i];
    const double tb = sb - b[i];
    const double taa = saa - a[i] * a[i];
    const double tbb = sbb - b[i] * b[i];
    const double tab = sab - a[i] * b[i];
    const double caa = taa - ta * ta / m;
    const double cbb = tbb - tb * tb / m;
    const double cab = tab - ta * tb / m;
    loo[i] = (caa > 0.0 && cbb > 0.0) ? cab / std::sqrt(caa * cbb) : 0.0;
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(n);
  double sq = 0.0;
  for (double v : loo) sq += (v - mean) * (v - mean);
  return std::sqrt(sq * m / static_cast<double>(n));
}

}  // namespace dsb
