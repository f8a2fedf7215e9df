#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "sklarsomega/error.hpp"

namespace sklarsomega::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample variance with divisor n - 1.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double sd(std::span<const double> x) { return std::sqrt(variance(x)); }

/// Median-unbiased sample quantile: linear interpolation at plotting
/// position (n + 1/3) p + 1/3 of the sorted sample.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of empty sample");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie strictly inside (0,1)");
  const double n = static_cast<double>(sorted.size());
  const double h = (n + 1.0 / 3.0) * p + 1.0 / 3.0;
  if (h <= 1.0) return sorted.front();
  if (h >= n) return sorted.back();
  const auto j = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(j);
  return sorted[j - 1] + frac * (sorted[j] - sorted[j - 1]);
}

inline double quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  return quantile_sorted(x, p);
}

inline double median(std::vector<double> x) {
  if (x.empty()) throw DomainError("median of empty sample");
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

/// Median absolute deviation from the median (unscaled).
inline double mad(std::span<const double> x) {
  const double med = median({x.begin(), x.end()});
  std::vector<double> dev;
  dev.reserve(x.size());
  for (double v : x) dev.push_back(std::abs(v - med));
  return median(std::move(dev));
}

/// Silverman's rule-of-thumb bandwidth for a Gaussian kernel.
inline double silverman_bandwidth(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double sdev = sd(x);
  const double iqr = s.size() >= 2 ? quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25) : 0.0;
  double spread = iqr > 0.0 ? std::min(sdev, iqr / 1.34) : sdev;
  return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

/// Gaussian kernel density estimate at x with bandwidth h.
inline double kde_density(std::span<const double> x, double at, double h) {
  if (x.empty() || !(h > 0.0)) throw DomainError("kde_density: empty sample or bad bandwidth");
  double s = 0.0;
  for (double v : x) {
    const double u = (at - v) / h;
    s += std::exp(-0.5 * u * u);
  }
  return s / (static_cast<double>(x.size()) * h * std::sqrt(2.0 * std::numbers::pi));
}

/// Monte Carlo standard error of the sample p-quantile:
/// sqrt(p(1-p)/n) / f(q_p) with f a kernel density estimate.
inline double quantile_mcse(std::span<const double> x, double p) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  if (s.size() < 2 || s.front() == s.back()) return 0.0;
  const double h = silverman_bandwidth(s);
  if (!(h > 0.0)) return 0.0;
  const double q = quantile_sorted(s, p);
  const double f = kde_density(s, q, h);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(s.size())) / f;
}

/// Monte Carlo standard error of a sample standard deviation, sd/sqrt(2(n-1)).
inline double sd_mcse(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return sd(x) / std::sqrt(2.0 * static_cast<double>(x.size() - 1));
}

}  // namespace sklarsomega::stats
