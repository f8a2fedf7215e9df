#pragma once

// Draw datasets from the Gaussian copula model: Z ~ N(0, Omega) per unit,
// U = Phi(Z), Y = F^{-1}(U).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/tools/roots.hpp>

#include "sklarsomega/correlation.hpp"
#include "sklarsomega/data.hpp"
#include "sklarsomega/error.hpp"
#include "sklarsomega/estimation.hpp"
#include "sklarsomega/marginals.hpp"
#include "sklarsomega/normal.hpp"
#include "sklarsomega/rng.hpp"

namespace sklarsomega {

/// Finite mixture of Gaussians, used only to generate data.
struct GaussianMixture {
  std::vector<double> weight, mean, sd;

  double cdf(double y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k) s += weight[k] * phi((y - mean[k]) / sd[k]);
    return s;
  }

  double pdf(double y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k)
      s += weight[k] * std::exp(log_normal_pdf((y - mean[k]) / sd[k])) / sd[k];
    return s;
  }

  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("mixture quantile: p must lie in (0,1)");
    double lo = kInf, hi = -kInf;
    for (std::size_t k = 0; k < weight.size(); ++k) {
      lo = std::min(lo, mean[k] - 40.0 * sd[k]);
      hi = std::max(hi, mean[k] + 40.0 * sd[k]);
    }
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve([&](double y) { return cdf(y) - p; }, lo, hi,
                                               boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
  }

  bool valid() const {
    if (weight.empty() || weight.size() != mean.size() || weight.size() != sd.size()) return false;
    double s = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k) {
      if (!(weight[k] > 0.0) || !(sd[k] > 0.0)) return false;
      s += weight[k];
    }
    return std::abs(s - 1.0) < 1e-9;
  }
};

/// A data-generating margin: a parametric family, a Gaussian mixture, or an
/// empirical distribution (its median-unbiased quantile function).
class SimulationMargin {
 public:
  enum class Kind { family, mixture, empirical };

  SimulationMargin(MarginalFamily f) : kind_(Kind::family), family_(std::move(f)) {  // NOLINT
    if (!family_.valid()) throw DomainError("simulation margin: invalid parameters");
  }
  SimulationMargin(GaussianMixture m) : kind_(Kind::mixture), mixture_(std::move(m)) {  // NOLINT
    if (!mixture_.valid()) throw DomainError("simulation margin: invalid mixture");
  }
  SimulationMargin(EmpiricalCdf e) : kind_(Kind::empirical), ecdf_(std::move(e)) {}  // NOLINT

  Kind kind() const { return kind_; }
  bool categorical() const { return kind_ == Kind::family && !family_.continuous(); }
  int categories() const { return categorical() ? family_.categories() : 0; }
  const MarginalFamily& family() const { return family_; }
  const GaussianMixture& mixture() const { return mixture_; }

  double quantile(double u) const {
    switch (kind_) {
      case Kind::family: return sklarsomega::quantile(family_, u);
      case Kind::mixture: return mixture_.quantile(u);
      case Kind::empirical: return ecdf_->quantile(u);
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::family: return sklarsomega::describe(family_);
      case Kind::mixture: {
        std::string out = "mixture(";
        for (std::size_t k = 0; k < mixture_.weight.size(); ++k) {
          if (k) out += ",";
          out += detail::format_double(mixture_.weight[k]) + "," + detail::format_double(mixture_.mean[k]) +
                 "," + detail::format_double(mixture_.sd[k]);
        }
        return out + ")";
      }
      case Kind::empirical: return "empirical";
    }
    return "";
  }

 private:
  Kind kind_;
  MarginalFamily family_;
  GaussianMixture mixture_;
  std::optional<EmpiricalCdf> ecdf_;
};

/// Parse a simulation margin: any `parse_margin` form, or
/// "mixture(w1,mu1,sd1, w2,mu2,sd2, ...)".
inline SimulationMargin parse_simulation_margin(std::string_view spec) {
  const auto t = detail::trim(spec);
  if (t.rfind("mixture", 0) == 0) {
    const auto open = t.find('('), close = t.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
      throw ParseError("mixture must look like mixture(w,mu,sd,...)");
    std::vector<double> args;
    for (auto tok : detail::split(t.substr(open + 1, close - open - 1), ',')) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw ParseError("bad mixture argument");
      args.push_back(v);
    }
    if (args.empty() || args.size() % 3) throw ParseError("mixture needs (weight, mean, sd) triples");
    GaussianMixture m;
    for (std::size_t i = 0; i < args.size(); i += 3) {
      m.weight.push_back(args[i]);
      m.mean.push_back(args[i + 1]);
      m.sd.push_back(args[i + 2]);
    }
    if (!m.valid()) throw ParseError("invalid mixture parameters");
    return m;
  }
  return parse_margin(t);
}

namespace detail {

inline double open_unit(double u) { return std::clamp(u, 1e-300, 1.0 - 0x1p-53); }

}  // namespace detail

/// New scores for every observed cell of `layout` (same roles, mask, level
/// and K) drawn from the copula at `omega` with margin `margin`.
inline AgreementData simulate_data(const CorrelationStructure& structure, std::span<const double> omega,
                                   const SimulationMargin& margin, const AgreementData& layout, Rng& rng) {
  if (structure.n_columns() != layout.n_columns()) throw DomainError("simulate: structure/data column mismatch");
  if (margin.categorical() != is_categorical(layout.level()))
    throw DomainError("simulate: margin does not match the level of measurement");
  const std::size_t nc = layout.n_columns();
  std::vector<double> values(layout.n_units() * nc, std::numeric_limits<double>::quiet_NaN());
  std::map<std::vector<std::size_t>, Eigen::MatrixXd> factors;
  for (std::size_t u = 0; u < layout.n_units(); ++u) {
    const auto pattern = observed_pattern(layout, u);
    auto it = factors.find(pattern);
    if (it == factors.end()) {
      Eigen::LLT<Eigen::MatrixXd> llt(structure.build_block(omega, pattern));
      if (llt.info() != Eigen::Success) throw DomainError("simulate: correlation block is not positive definite");
      it = factors.emplace(pattern, Eigen::MatrixXd(llt.matrixL())).first;
    }
    const auto m = static_cast<Eigen::Index>(pattern.size());
    Eigen::VectorXd e(m);
    for (Eigen::Index i = 0; i < m; ++i) e[i] = rng.normal();
    const Eigen::VectorXd z = it->second * e;
    for (Eigen::Index i = 0; i < m; ++i)
      values[u * nc + pattern[static_cast<std::size_t>(i)]] = margin.quantile(detail::open_unit(phi(z[i])));
  }
  return AgreementData(layout.n_units(), layout.roles(), layout.level(), std::move(values), layout.categories(),
                       layout.category_labels());
}

/// Fully observed single-method data: n_units units scored once by each of
/// n_coders coders, inter-coder structure with agreement omega.
inline AgreementData simulate_inter(double omega, const SimulationMargin& margin, std::size_t n_units,
                                    int n_coders, Level level, Rng& rng) {
  std::vector<ColumnRole> roles;
  for (int c = 1; c <= n_coders; ++c) roles.push_back(ColumnRole::score(1, c, 1));
  const double fill = margin.categorical() ? 1.0 : 0.5;
  AgreementData layout(n_units, roles, level, std::vector<double>(n_units * roles.size(), fill),
                       margin.categories());
  CorrelationStructure s(StructureKind::inter, roles);
  const double w[] = {omega};
  return simulate_data(s, w, margin, layout, rng);
}

/// A dataset from the fitted model at its estimates, with the fit data's
/// missingness pattern. SMP fits draw from the first-stage ECDF.
inline AgreementData simulate_from_fit(const Fit& f, Rng& rng) {
  if (f.method == Method::SMP) return simulate_data(f.structure, f.omega(), SimulationMargin(*f.ecdf), f.data, rng);
  return simulate_data(f.structure, f.omega(), SimulationMargin(*f.margin()), f.data, rng);
}

}  // namespace sklarsomega
