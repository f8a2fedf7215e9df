#pragma once

// Log objectives for the four estimation methods. Each objective is bound
// to one dataset and returns -infinity for infeasible parameters.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sklarsomega/correlation.hpp"
#include "sklarsomega/data.hpp"
#include "sklarsomega/error.hpp"
#include "sklarsomega/marginals.hpp"
#include "sklarsomega/normal.hpp"

namespace sklarsomega {

enum class Method { ML, DT, CML, SMP };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::ML: return "ML";
    case Method::DT: return "DT";
    case Method::CML: return "CML";
    case Method::SMP: return "SMP";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "ML") return Method::ML;
  if (s == "DT") return Method::DT;
  if (s == "CML") return Method::CML;
  if (s == "SMP") return Method::SMP;
  throw ParseError("unknown method '" + std::string(name) + "'");
}

/// Throws FitError when the method cannot be used with the margin/level.
inline void check_compatible(Method method, MarginKind margin, Level level) {
  const bool categorical = margin == MarginKind::categorical;
  switch (method) {
    case Method::ML:
      if (categorical) throw FitError("ML needs a continuous margin; use DT or CML for categorical data");
      break;
    case Method::DT:
    case Method::CML:
      if (!categorical) throw FitError(to_string(method) + " needs a categorical margin");
      break;
    case Method::SMP:
      if (is_categorical(level)) throw FitError("SMP needs interval or ratio data");
      break;
  }
  if (categorical != is_categorical(level))
    throw FitError(to_string(margin) + " margin does not match " + to_string(level) + " data");
}

namespace detail {

inline double clamped_phi_inv(double u) {
  constexpr double lo = 1e-300;
  constexpr double hi = 1.0 - 0x1p-53;
  return phi_inv(std::clamp(u, lo, hi));
}

// Units grouped by their observed-column pattern so each distinct block is
// factored once per evaluation.
struct PatternGroups {
  std::vector<std::vector<std::size_t>> patterns;
  std::vector<std::size_t> unit_pattern;

  explicit PatternGroups(const AgreementData& data) {
    std::map<std::vector<std::size_t>, std::size_t> index;
    unit_pattern.reserve(data.n_units());
    for (std::size_t u = 0; u < data.n_units(); ++u) {
      auto p = observed_pattern(data, u);
      auto [it, inserted] = index.try_emplace(p, patterns.size());
      if (inserted) patterns.push_back(std::move(p));
      unit_pattern.push_back(it->second);
    }
  }
};

}  // namespace detail

/// Log objective of one method on one dataset, as a function of the packed
/// parameter vector theta (correlation part first, then the free margin
/// parameters; SMP has no margin part).
class Objective {
 public:
  Objective(AgreementData data, CorrelationStructure structure, Method method, MarginKind margin,
            std::vector<double> smp_z = {})
      : data_(std::move(data)),
        structure_(std::move(structure)),
        method_(method),
        margin_(margin),
        groups_(data_),
        smp_z_(std::move(smp_z)) {
    if (structure_.n_columns() != data_.n_columns())
      throw DomainError("structure and data have different columns");
    if (method_ == Method::SMP) {
      if (smp_z_.size() != data_.n_units() * data_.n_columns())
        throw DomainError("SMP objective needs one latent score per cell");
      for (std::size_t u = 0; u < data_.n_units(); ++u)
        for (std::size_t c = 0; c < data_.n_columns(); ++c)
          if (data_.observed(u, c) && !std::isfinite(smp_z_[u * data_.n_columns() + c]))
            throw FitError("SMP latent scores must be finite; use a Winsorized or smoothed ECDF");
    }
  }

  const AgreementData& data() const { return data_; }
  const CorrelationStructure& structure() const { return structure_; }
  Method method() const { return method_; }
  MarginKind margin_kind() const { return margin_; }
  std::size_t n_omega() const { return structure_.n_params(); }

  double operator()(std::span<const double> theta) const {
    const std::size_t q = n_omega();
    if (theta.size() < q) throw DomainError("objective: parameter vector too short");
    for (double v : theta)
      if (!std::isfinite(v)) return -kInf;
    const auto omega = theta.first(q);
    for (std::size_t k = 0; k < q; ++k)
      if (!structure_.is_coefficient(k) && (omega[k] < 0.0 || omega[k] >= 1.0)) return -kInf;
    if (method_ == Method::SMP) return smp(omega);

    MarginalFamily f = unpack_margin(margin_, theta.subspan(q));
    if (margin_ == MarginKind::categorical) {
      if (static_cast<int>(f.psi.size()) != data_.categories())
        throw DomainError("objective: wrong number of category probabilities");
      for (double p : f.psi)
        if (!(p >= kProbabilityLower)) return -kInf;
    } else if (!f.valid()) {
      return -kInf;
    }
    switch (method_) {
      case Method::ML:
      case Method::DT: return gaussian_copula(omega, f);
      case Method::CML: return cml(omega, f);
      case Method::SMP: break;
    }
    return -kInf;
  }

 private:
  // Factors of every distinct unit block; empty when one is not PD.
  std::optional<std::vector<Eigen::LLT<Eigen::MatrixXd>>> factor(std::span<const double> omega) const {
    std::vector<Eigen::LLT<Eigen::MatrixXd>> out;
    out.reserve(groups_.patterns.size());
    for (const auto& p : groups_.patterns) {
      Eigen::LLT<Eigen::MatrixXd> llt(structure_.build_block(omega, p));
      if (llt.info() != Eigen::Success) return std::nullopt;
      const auto d = llt.matrixLLT().diagonal();
      if ((d.array() <= 1e-12).any() || !d.allFinite()) return std::nullopt;
      out.push_back(std::move(llt));
    }
    return out;
  }

  // -1/2 log|Omega| - 1/2 z'(Omega^{-1} - I) z + sum log f(y).
  double gaussian_copula(std::span<const double> omega, const MarginalFamily& f) const {
    auto factors = factor(omega);
    if (!factors) return -kInf;
    std::vector<double> logdet(factors->size());
    for (std::size_t i = 0; i < factors->size(); ++i)
      logdet[i] = BlockDiagonal::block_log_determinant((*factors)[i]);

    // Categorical DT scores depend only on the category.
    std::vector<double> zcat, logp;
    if (!f.continuous()) {
      for (int k = 1; k <= data_.categories(); ++k) {
        zcat.push_back(detail::clamped_phi_inv(dt_cdf(f, k)));
        logp.push_back(std::log(f.psi[static_cast<std::size_t>(k) - 1]));
      }
    }

    double total = 0.0;
    Eigen::VectorXd z;
    for (std::size_t u = 0; u < data_.n_units(); ++u) {
      const std::size_t g = groups_.unit_pattern[u];
      const auto& pattern = groups_.patterns[g];
      z.resize(static_cast<Eigen::Index>(pattern.size()));
      double marginal = 0.0;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        const double y = data_.value(u, pattern[i]);
        if (f.continuous()) {
          const double lf = log_pdf(f, y);
          if (!std::isfinite(lf)) return -kInf;
          marginal += lf;
          z[static_cast<Eigen::Index>(i)] = detail::clamped_phi_inv(cdf(f, y));
        } else {
          const auto k = static_cast<std::size_t>(y) - 1;
          marginal += logp[k];
          z[static_cast<Eigen::Index>(i)] = zcat[k];
        }
      }
      const double quad = BlockDiagonal::block_quadratic_form((*factors)[g], z);
      total += -0.5 * logdet[g] - 0.5 * (quad - z.squaredNorm()) + marginal;
    }
    return std::isnan(total) ? -kInf : total;
  }

  double smp(std::span<const double> omega) const {
    auto factors = factor(omega);
    if (!factors) return -kInf;
    double total = 0.0;
    Eigen::VectorXd z;
    const std::size_t nc = data_.n_columns();
    for (std::size_t u = 0; u < data_.n_units(); ++u) {
      const std::size_t g = groups_.unit_pattern[u];
      const auto& pattern = groups_.patterns[g];
      z.resize(static_cast<Eigen::Index>(pattern.size()));
      for (std::size_t i = 0; i < pattern.size(); ++i)
        z[static_cast<Eigen::Index>(i)] = smp_z_[u * nc + pattern[i]];
      const auto& llt = (*factors)[g];
      total += -0.5 * BlockDiagonal::block_log_determinant(llt) -
               0.5 * BlockDiagonal::block_quadratic_form(llt, z);
    }
    return total;
  }

  // Sum over within-unit observed pairs with nonzero correlation of the log
  // rectangle probability P(y_a - 1 < Y_a <= y_a, y_b - 1 < Y_b <= y_b).
  double cml(std::span<const double> omega, const MarginalFamily& f) const {
    const int K = data_.categories();
    // cut[k] = Phi^{-1}(F(k)), k = 0..K, with F(0) = 0 and F(K) = 1 exact.
    std::vector<double> cut(static_cast<std::size_t>(K) + 1);
    cut[0] = -kInf;
    cut[static_cast<std::size_t>(K)] = kInf;
    double s = 0.0;
    for (int k = 1; k < K; ++k) {
      s += f.psi[static_cast<std::size_t>(k) - 1];
      if (!(s < 1.0)) return -kInf;
      cut[static_cast<std::size_t>(k)] = phi_inv(s);
    }

    // Rectangle probabilities repeat across units; cache them for this
    // evaluation only.
    std::map<std::tuple<int, int, double>, double> memo;

    double total = 0.0;
    for (std::size_t u = 0; u < data_.n_units(); ++u) {
      const auto& pattern = groups_.patterns[groups_.unit_pattern[u]];
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        for (std::size_t j = i + 1; j < pattern.size(); ++j) {
          const std::size_t a = pattern[i], b = pattern[j];
          if (structure_.structural_zero(a, b)) continue;
          const double rho = structure_.entry(a, b, omega);
          int ya = static_cast<int>(data_.value(u, a));
          int yb = static_cast<int>(data_.value(u, b));
          if (ya > yb) std::swap(ya, yb);
          auto [it, inserted] = memo.try_emplace({ya, yb, rho}, 0.0);
          if (inserted) it->second = std::log(rectangle(cut, ya, yb, rho));
          total += it->second;
          if (!std::isfinite(total)) return -kInf;
        }
      }
    }
    return total;
  }

 public:
  /// P(y_a - 1 < Y_a <= y_a, y_b - 1 < Y_b <= y_b) given the latent cut
  /// points cut[0..K]; may be 0 or slightly negative numerically.
  static double rectangle(std::span<const double> cut, int ya, int yb, double rho) {
    if (rho >= 1.0 || rho <= -1.0) return 0.0;
    const double a0 = cut[static_cast<std::size_t>(ya)], a1 = cut[static_cast<std::size_t>(ya) - 1];
    const double b0 = cut[static_cast<std::size_t>(yb)], b1 = cut[static_cast<std::size_t>(yb) - 1];
    const double p = bvn_cdf(a0, b0, rho) - bvn_cdf(a1, b0, rho) - bvn_cdf(a0, b1, rho) +
                     bvn_cdf(a1, b1, rho);
    return p > 0.0 ? p : 0.0;
  }

 private:
  AgreementData data_;
  CorrelationStructure structure_;
  Method method_;
  MarginKind margin_;
  detail::PatternGroups groups_;
  std::vector<double> smp_z_;
};

}  // namespace sklarsomega
