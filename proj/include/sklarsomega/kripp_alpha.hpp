#pragma once

// Krippendorff's alpha from the coincidence of pairable values, with a
// unit-resampling bootstrap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "sklarsomega/data.hpp"
#include "sklarsomega/error.hpp"
#include "sklarsomega/parallel.hpp"
#include "sklarsomega/rng.hpp"
#include "sklarsomega/stats.hpp"

namespace sklarsomega {

namespace detail {

// Pairable values of each unit (units with fewer than two are dropped).
// Categorical data contribute their category labels.
inline std::vector<std::vector<double>> pairable_values(const AgreementData& data) {
  const bool cat = is_categorical(data.level());
  std::vector<std::vector<double>> out;
  for (std::size_t u = 0; u < data.n_units(); ++u) {
    std::vector<double> v;
    for (std::size_t c = 0; c < data.n_columns(); ++c) {
      if (!data.observed(u, c)) continue;
      const double y = data.value(u, c);
      v.push_back(cat ? data.category_labels()[static_cast<std::size_t>(y) - 1] : y);
    }
    if (v.size() >= 2) out.push_back(std::move(v));
  }
  return out;
}

// Squared difference for the metric; `cum` holds, for ordinal data, the
// cumulative pairable-value counts used by the ordinal metric.
struct AlphaMetric {
  Level level;
  std::map<double, double> cum;    // value -> count of values strictly below
  std::map<double, double> count;  // value -> count

  double operator()(double a, double b) const {
    if (a == b) return 0.0;
    switch (level) {
      case Level::nominal: return 1.0;
      case Level::interval: return (a - b) * (a - b);
      case Level::ratio: {
        const double s = a + b;
        return s == 0.0 ? 0.0 : ((a - b) / s) * ((a - b) / s);
      }
      case Level::ordinal: {
        if (a > b) std::swap(a, b);
        // sum of counts from a to b inclusive, minus half the end counts
        const double span = cum.at(b) + count.at(b) - cum.at(a);
        const double d = span - (count.at(a) + count.at(b)) / 2.0;
        return d * d;
      }
    }
    return 0.0;
  }
};

inline std::optional<double> alpha_from_units(const std::vector<std::vector<double>>& units, Level level) {
  std::map<double, double> count;
  double n = 0.0;
  for (const auto& v : units)
    for (double y : v) {
      count[y] += 1.0;
      n += 1.0;
    }
  if (n < 2.0 || count.size() < 2) return std::nullopt;

  AlphaMetric metric{level, {}, count};
  if (level == Level::ordinal) {
    double below = 0.0;
    for (auto& [value, c] : count) {
      metric.cum[value] = below;
      below += c;
    }
  }

  double observed = 0.0;
  for (const auto& v : units) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) s += 2.0 * metric(v[i], v[j]);
    observed += s / static_cast<double>(v.size() - 1);
  }
  observed /= n;

  double expected = 0.0;
  if (level == Level::nominal) {
    double same = 0.0;
    for (auto& [value, c] : count) same += c * c;
    expected = (n * n - same) / (n * (n - 1.0));
  } else if (level == Level::interval) {
    double s1 = 0.0, s2 = 0.0;
    for (auto& [value, c] : count) {
      s1 += c * value;
      s2 += c * value * value;
    }
    expected = 2.0 * (n * s2 - s1 * s1) / (n * (n - 1.0));
  } else {
    for (auto a = count.begin(); a != count.end(); ++a)
      for (auto b = std::next(a); b != count.end(); ++b)
        expected += 2.0 * a->second * b->second * metric(a->first, b->first);
    expected /= n * (n - 1.0);
  }
  if (!(expected > 0.0)) return std::nullopt;
  return 1.0 - observed / expected;
}

}  // namespace detail

/// Krippendorff's alpha with the metric implied by `level` (discrete for
/// nominal). Throws DegenerateDataError when it is undefined.
inline double alpha(const AgreementData& data, Level level) {
  const auto units = detail::pairable_values(data);
  if (units.size() < 2) throw DegenerateDataError("alpha needs at least two units with two scores");
  auto a = detail::alpha_from_units(units, level);
  if (!a) throw DegenerateDataError("alpha is undefined: no expected disagreement");
  return *a;
}

inline double alpha(const AgreementData& data) { return alpha(data, data.level()); }

struct AlphaResult {
  double estimate = 0.0;
  Level metric = Level::nominal;
  std::vector<double> bootstrap;
  std::size_t skipped = 0;  // degenerate resamples
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  double mcse_lower = 0.0;
  double mcse_upper = 0.0;
};

/// Alpha plus a bootstrap interval from resampling units with replacement
/// (median-unbiased quantiles, upper end truncated at 1).
inline AlphaResult alpha_bootstrap(const AgreementData& data, Level metric, std::size_t n_boot,
                                   std::uint64_t seed, double level = 0.95, std::size_t workers = 1) {
  AlphaResult out;
  out.metric = metric;
  out.level = level;
  out.estimate = alpha(data, metric);
  const auto units = detail::pairable_values(data);
  std::vector<double> draws(n_boot, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n_boot, workers, [&](std::size_t b) {
    Rng rng(seed, b);
    std::vector<std::vector<double>> sample;
    sample.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) sample.push_back(units[rng.index(units.size())]);
    if (auto a = detail::alpha_from_units(sample, metric)) draws[b] = *a;
  });
  for (double d : draws) {
    if (std::isnan(d))
      ++out.skipped;
    else
      out.bootstrap.push_back(d);
  }
  if (out.bootstrap.size() < 2) throw DegenerateDataError("alpha bootstrap: too few usable resamples");
  const double tail = (1.0 - level) / 2.0;
  std::vector<double> sorted = out.bootstrap;
  std::sort(sorted.begin(), sorted.end());
  out.lower = std::min(stats::quantile_sorted(sorted, tail), 1.0);
  out.upper = std::min(stats::quantile_sorted(sorted, 1.0 - tail), 1.0);
  out.mcse_lower = stats::quantile_mcse(sorted, tail);
  out.mcse_upper = stats::quantile_mcse(sorted, 1.0 - tail);
  return out;
}

}  // namespace sklarsomega
