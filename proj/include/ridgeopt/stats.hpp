#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ridgeopt/errors.hpp"
#include "ridgeopt/rng.hpp"

namespace ridgeopt {

inline double median_sorted(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  if (n == 0) throw ConfigError("median: empty sample");
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return median_sorted(values);
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730951); }

/// Standard normal quantile: Acklam's rational approximation polished with one
/// Halley step, good to full double precision over (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ConfigError("normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double err = normal_cdf(x) - p;
  const double u = err * 2.5066282746310002 * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

/// One bootstrap confidence interval. method/statistic labels are filled by
/// the aggregation layer.
struct CiSummary {
  std::string method;
  std::string statistic;
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t resamples = 0;
  double confidence = 0.95;
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double h = q * static_cast<double>(n - 1);
  const std::size_t i = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(i);
  return i + 1 < n ? sorted[i] + frac * (sorted[i + 1] - sorted[i]) : sorted[i];
}

// Leave-one-out medians of a sorted sample, in O(n): dropping the element at
// sorted position r shifts which order statistics straddle the middle.
inline std::vector<double> jackknife_medians_sorted(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  std::vector<double> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t m = n - 1;
    auto reduced = [&](std::size_t j) { return j < r ? sorted[j] : sorted[j + 1]; };
    out[r] = m % 2 == 1 ? reduced(m / 2) : 0.5 * (reduced(m / 2 - 1) + reduced(m / 2));
  }
  return out;
}

}  // namespace detail

/// Bias-corrected and accelerated bootstrap interval for the median.
///
/// z0 comes from the bootstrap distribution's position relative to the point
/// estimate (ties split evenly), the acceleration a from jackknife skewness,
/// and the adjusted percentiles are read off the bootstrap empirical quantile
/// function. A constant sample yields the degenerate interval (c, c, c).
inline CiSummary bca_interval(const std::vector<double>& values, std::size_t resamples,
                              double confidence, std::uint64_t seed) {
  if (values.empty()) throw ConfigError("bca_interval: empty sample");
  if (resamples < 2) throw ConfigError("bca_interval: need at least 2 resamples");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("bca_interval: confidence must lie in (0, 1)");

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double point = median_sorted(sorted);

  CiSummary summary;
  summary.point = summary.lo = summary.hi = point;
  summary.resamples = resamples;
  summary.confidence = confidence;
  const std::size_t n = values.size();
  if (n < 2 || sorted.front() == sorted.back()) return summary;

  Rng rng(seed);
  std::vector<double> boot(resamples);
  std::vector<double> work(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) work[i] = sorted[rng.uniform_index(n)];
    std::sort(work.begin(), work.end());
    boot[b] = median_sorted(work);
  }
  std::sort(boot.begin(), boot.end());

  const double below_strict =
      static_cast<double>(std::lower_bound(boot.begin(), boot.end(), point) - boot.begin());
  const double below_weak =
      static_cast<double>(std::upper_bound(boot.begin(), boot.end(), point) - boot.begin());
  double frac = (below_strict + below_weak) / (2.0 * static_cast<double>(resamples));
  const double clamp = 0.5 / static_cast<double>(resamples);
  frac = std::min(std::max(frac, clamp), 1.0 - clamp);
  const double z0 = normal_quantile(frac);

  const std::vector<double> jack = detail::jackknife_medians_sorted(sorted);
  double jack_mean = 0.0;
  for (double v : jack) jack_mean += v;
  jack_mean /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (double v : jack) {
    const double diff = jack_mean - v;
    num += diff * diff * diff;
    den += diff * diff;
  }
  const double accel = den > 0.0 ? num / (6.0 * std::pow(den, 1.5)) : 0.0;

  auto adjusted = [&](double alpha) {
    const double z = z0 + normal_quantile(alpha);
    const double shrink = 1.0 - accel * z;
    if (shrink <= 0.0) return z > 0.0 ? 1.0 : 0.0;
    return normal_cdf(z0 + z / shrink);
  };
  const double alpha = 0.5 * (1.0 - confidence);
  summary.lo = std::min(detail::quantile_sorted(boot, adjusted(alpha)), point);
  summary.hi = std::max(detail::quantile_sorted(boot, adjusted(1.0 - alpha)), point);
  return summary;
}

}  // namespace ridgeopt
