#pragma once

// Marginal families F(.|psi) and empirical distribution functions.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sklarsomega/data.hpp"
#include "sklarsomega/error.hpp"
#include "sklarsomega/normal.hpp"
#include "sklarsomega/stats.hpp"

namespace sklarsomega {

enum class MarginKind { gaussian, laplace, t, gamma, beta, categorical };

inline std::string to_string(MarginKind kind) {
  switch (kind) {
    case MarginKind::gaussian: return "gaussian";
    case MarginKind::laplace: return "laplace";
    case MarginKind::t: return "t";
    case MarginKind::gamma: return "gamma";
    case MarginKind::beta: return "beta";
    case MarginKind::categorical: return "categorical";
  }
  return "unknown";
}

inline MarginKind parse_margin_kind(std::string_view name) {
  if (name == "gaussian" || name == "normal") return MarginKind::gaussian;
  if (name == "laplace") return MarginKind::laplace;
  if (name == "t") return MarginKind::t;
  if (name == "gamma") return MarginKind::gamma;
  if (name == "beta") return MarginKind::beta;
  if (name == "categorical") return MarginKind::categorical;
  throw ParseError("unknown marginal family '" + std::string(name) + "'");
}

/// A parametric marginal family with its parameter vector psi:
///   gaussian(mu, sigma), laplace(mu, sigma) with sigma the scale b,
///   t(mu, nu) noncentral t with noncentrality mu and nu degrees of freedom,
///   gamma(alpha, beta) shape/rate, beta(alpha, beta),
///   categorical(p_1..p_K) on codes 1..K.
struct MarginalFamily {
  MarginKind kind = MarginKind::gaussian;
  std::vector<double> psi;

  static MarginalFamily gaussian(double mu, double sigma) { return {MarginKind::gaussian, {mu, sigma}}; }
  static MarginalFamily laplace(double mu, double sigma) { return {MarginKind::laplace, {mu, sigma}}; }
  static MarginalFamily t(double ncp, double df) { return {MarginKind::t, {ncp, df}}; }
  static MarginalFamily gamma(double shape, double rate) { return {MarginKind::gamma, {shape, rate}}; }
  static MarginalFamily beta(double a, double b) { return {MarginKind::beta, {a, b}}; }
  static MarginalFamily categorical(std::vector<double> p) { return {MarginKind::categorical, std::move(p)}; }

  bool continuous() const { return kind != MarginKind::categorical; }
  int categories() const { return kind == MarginKind::categorical ? static_cast<int>(psi.size()) : 0; }

  /// Whether psi lies in the family's parameter space.
  bool valid() const {
    auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
    switch (kind) {
      case MarginKind::gaussian:
      case MarginKind::laplace:
      case MarginKind::t:
        return psi.size() == 2 && std::isfinite(psi[0]) && pos(psi[1]);
      case MarginKind::gamma:
      case MarginKind::beta:
        return psi.size() == 2 && pos(psi[0]) && pos(psi[1]);
      case MarginKind::categorical: {
        if (psi.size() < 2) return false;
        double s = 0.0;
        for (double p : psi) {
          if (!(p > 0.0)) return false;
          s += p;
        }
        return std::abs(s - 1.0) < 1e-9;
      }
    }
    return false;
  }

  friend bool operator==(const MarginalFamily&, const MarginalFamily&) = default;
};

namespace detail {

inline void require_valid(const MarginalFamily& f) {
  if (!f.valid()) throw DomainError("invalid parameters for " + to_string(f.kind) + " margin");
}

inline boost::math::non_central_t_distribution<double> nct(const MarginalFamily& f) {
  return boost::math::non_central_t_distribution<double>(f.psi[1], f.psi[0]);
}

inline double categorical_cdf(std::span<const double> p, double y) {
  if (y < 1.0) return 0.0;
  const auto k = static_cast<std::size_t>(std::floor(y));
  if (k >= p.size()) return 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += p[i];
  return std::min(s, 1.0);
}

}  // namespace detail

inline double cdf(const MarginalFamily& f, double y) {
  namespace bm = boost::math;
  const auto& q = f.psi;
  switch (f.kind) {
    case MarginKind::gaussian: return phi((y - q[0]) / q[1]);
    case MarginKind::laplace: {
      const double s = (y - q[0]) / q[1];
      return s < 0.0 ? 0.5 * std::exp(s) : 1.0 - 0.5 * std::exp(-s);
    }
    case MarginKind::t: return bm::cdf(detail::nct(f), y);
    case MarginKind::gamma:
      return y <= 0.0 ? 0.0 : bm::gamma_p(q[0], q[1] * y);
    case MarginKind::beta:
      if (y <= 0.0) return 0.0;
      if (y >= 1.0) return 1.0;
      return bm::ibeta(q[0], q[1], y);
    case MarginKind::categorical: return detail::categorical_cdf(q, y);
  }
  return 0.0;
}

inline double log_pdf(const MarginalFamily& f, double y) {
  namespace bm = boost::math;
  const auto& q = f.psi;
  constexpr double ninf = -kInf;
  switch (f.kind) {
    case MarginKind::gaussian: {
      const double s = (y - q[0]) / q[1];
      return log_normal_pdf(s) - std::log(q[1]);
    }
    case MarginKind::laplace:
      return -std::log(2.0 * q[1]) - std::abs(y - q[0]) / q[1];
    case MarginKind::t: {
      const double d = bm::pdf(detail::nct(f), y);
      return d > 0.0 ? std::log(d) : ninf;
    }
    case MarginKind::gamma:
      if (y <= 0.0) return ninf;
      return q[0] * std::log(q[1]) + (q[0] - 1.0) * std::log(y) - q[1] * y - std::lgamma(q[0]);
    case MarginKind::beta:
      if (y <= 0.0 || y >= 1.0) return ninf;
      return (q[0] - 1.0) * std::log(y) + (q[1] - 1.0) * std::log1p(-y) -
             (std::lgamma(q[0]) + std::lgamma(q[1]) - std::lgamma(q[0] + q[1]));
    case MarginKind::categorical: {
      if (y != std::floor(y) || y < 1.0 || y > static_cast<double>(q.size())) return ninf;
      return std::log(q[static_cast<std::size_t>(y) - 1]);
    }
  }
  return ninf;
}

/// Density for continuous families, probability mass for categorical.
inline double pdf_or_pmf(const MarginalFamily& f, double y) { return std::exp(log_pdf(f, y)); }

/// Generalized (left-continuous) inverse of cdf. Throws unless 0 < p < 1.
inline double quantile(const MarginalFamily& f, double p) {
  namespace bm = boost::math;
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie strictly inside (0,1)");
  const auto& q = f.psi;
  switch (f.kind) {
    case MarginKind::gaussian: return q[0] + q[1] * phi_inv(p);
    case MarginKind::laplace:
      return p < 0.5 ? q[0] + q[1] * std::log(2.0 * p) : q[0] - q[1] * std::log(2.0 * (1.0 - p));
    case MarginKind::t: return bm::quantile(detail::nct(f), p);
    case MarginKind::gamma: return bm::gamma_p_inv(q[0], p) / q[1];
    case MarginKind::beta: return bm::ibeta_inv(q[0], q[1], p);
    case MarginKind::categorical: {
      double s = 0.0;
      for (std::size_t k = 0; k + 1 < q.size(); ++k) {
        s += q[k];
        if (p <= s) return static_cast<double>(k + 1);
      }
      return static_cast<double>(q.size());
    }
  }
  return 0.0;
}

/// Averaged distributional transform (F(y-1) + F(y)) / 2 for the
/// integer-support categorical family; F(y) for continuous families.
inline double dt_cdf(const MarginalFamily& f, double y) {
  if (f.continuous()) return cdf(f, y);
  return 0.5 * (cdf(f, y - 1.0) + cdf(f, y));
}

/// Starting values for psi from a pooled sample of observed scores.
///   gaussian, laplace: (mean, sd); t: (median, MAD);
///   gamma: (mean^2/var, mean/var); beta: method of moments;
///   categorical: empirical proportions over codes 1..K.
inline std::vector<double> init_params(std::span<const double> sample, MarginKind kind,
                                       int categories = 0) {
  if (sample.empty()) throw DegenerateDataError("init_params: empty sample");
  if (kind == MarginKind::categorical) {
    if (categories < 2) throw DomainError("init_params: categorical margin needs K >= 2");
    std::vector<double> count(static_cast<std::size_t>(categories), 0.0);
    for (double y : sample) {
      if (y != std::floor(y) || y < 1.0 || y > categories)
        throw DomainError("init_params: category code outside 1..K");
      count[static_cast<std::size_t>(y) - 1] += 1.0;
    }
    const double total = std::accumulate(count.begin(), count.end(), 0.0);
    for (double& c : count) c /= total;
    return count;
  }
  if (sample.size() < 2) throw DegenerateDataError("init_params: need at least two scores");
  const double m = stats::mean(sample);
  const double v = stats::variance(sample);
  if (!(v > 0.0)) throw DegenerateDataError("init_params: zero sample variance");
  switch (kind) {
    case MarginKind::gaussian:
    case MarginKind::laplace: return {m, std::sqrt(v)};
    case MarginKind::t: {
      const double mad = stats::mad(sample);
      if (!(mad > 0.0)) throw DegenerateDataError("init_params: zero median absolute deviation");
      return {stats::median({sample.begin(), sample.end()}), mad};
    }
    case MarginKind::gamma: return {m * m / v, m / v};
    case MarginKind::beta: {
      const double k = m * (1.0 - m) / v - 1.0;
      return {m * k, (1.0 - m) * k};
    }
    case MarginKind::categorical: break;
  }
  return {};
}

/// Parse "family(a, b, ...)", e.g. "beta(1.5,2)", "categorical(0.2,0.8)" or
/// "bernoulli(0.7)" (= categorical(0.3, 0.7) on codes 1, 2).
inline MarginalFamily parse_margin(std::string_view spec) {
  const auto open = spec.find('(');
  const auto close = spec.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw ParseError("margin must look like family(a,b,...): '" + std::string(spec) + "'");
  const auto name = detail::trim(spec.substr(0, open));
  std::vector<double> args;
  for (auto tok : detail::split(spec.substr(open + 1, close - open - 1), ',')) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw ParseError("bad margin argument '" + std::string(tok) + "'");
    args.push_back(v);
  }
  MarginalFamily f;
  if (name == "bernoulli") {
    if (args.size() != 1) throw ParseError("bernoulli takes one probability");
    f = MarginalFamily::categorical({1.0 - args[0], args[0]});
  } else {
    f.kind = parse_margin_kind(name);
    f.psi = std::move(args);
  }
  if (!f.valid()) throw ParseError("invalid parameters in margin '" + std::string(spec) + "'");
  return f;
}

inline std::string describe(const MarginalFamily& f) {
  std::string out = to_string(f.kind) + "(";
  for (std::size_t i = 0; i < f.psi.size(); ++i) {
    if (i) out += ",";
    out += detail::format_double(f.psi[i]);
  }
  return out + ")";
}

enum class EcdfVariant { standard, winsorized, smoothed };

inline std::string to_string(EcdfVariant v) {
  switch (v) {
    case EcdfVariant::standard: return "standard";
    case EcdfVariant::winsorized: return "winsorized";
    case EcdfVariant::smoothed: return "smoothed";
  }
  return "unknown";
}

inline EcdfVariant parse_ecdf_variant(std::string_view name) {
  if (name == "standard") return EcdfVariant::standard;
  if (name == "winsorized") return EcdfVariant::winsorized;
  if (name == "smoothed") return EcdfVariant::smoothed;
  throw ParseError("unknown ECDF variant '" + std::string(name) + "'");
}

/// Empirical distribution function of a pooled sample, optionally
/// Winsorized to [eps, 1 - eps] or smoothed with a Gaussian kernel.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;

  /// `tuning` is the truncation eps for the Winsorized variant (default
  /// 0.5 / n) or the kernel bandwidth for the smoothed one (default
  /// Silverman's rule). Ignored for the standard variant.
  EmpiricalCdf(std::vector<double> sample, EcdfVariant variant,
               std::optional<double> tuning = std::nullopt)
      : sorted_(std::move(sample)), variant_(variant) {
    if (sorted_.empty()) throw DegenerateDataError("empirical cdf of an empty sample");
    std::sort(sorted_.begin(), sorted_.end());
    const double n = static_cast<double>(sorted_.size());
    if (variant_ == EcdfVariant::winsorized) {
      epsilon_ = tuning.value_or(0.5 / n);
      if (!(epsilon_ > 0.0 && epsilon_ < 0.5)) throw DomainError("Winsorizing eps must lie in (0, 0.5)");
    } else if (variant_ == EcdfVariant::smoothed) {
      bandwidth_ = tuning ? *tuning : stats::silverman_bandwidth(sorted_);
      if (!(bandwidth_ > 0.0)) throw DomainError("smoothing bandwidth must be positive");
    }
  }

  EcdfVariant variant() const { return variant_; }
  double epsilon() const { return epsilon_; }
  double bandwidth() const { return bandwidth_; }
  const std::vector<double>& sorted_sample() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

  double operator()(double y) const {
    const double n = static_cast<double>(sorted_.size());
    if (variant_ == EcdfVariant::smoothed) {
      double s = 0.0;
      for (double x : sorted_) s += phi((y - x) / bandwidth_);
      return s / n;
    }
    const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), y) - sorted_.begin();
    const double f = static_cast<double>(count) / n;
    if (variant_ == EcdfVariant::winsorized) return std::clamp(f, epsilon_, 1.0 - epsilon_);
    return f;
  }

  /// Median-unbiased sample quantile of the underlying sample.
  double quantile(double p) const {
    if (sorted_.size() < 2) throw DegenerateDataError("empirical quantile needs at least two values");
    return stats::quantile_sorted(sorted_, p);
  }

 private:
  std::vector<double> sorted_;
  EcdfVariant variant_ = EcdfVariant::standard;
  double epsilon_ = 0.0;
  double bandwidth_ = 0.0;
};

}  // namespace sklarsomega
