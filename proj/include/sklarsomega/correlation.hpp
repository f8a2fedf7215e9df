#pragma once

// Copula correlation templates. A structure is laid out once against a
// dataset's column roles; every column pair is then mapped to a constant
// (0), a correlation parameter, or a regression-linked gold correlation.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sklarsomega/data.hpp"
#include "sklarsomega/error.hpp"
#include "sklarsomega/marginals.hpp"
#include "sklarsomega/normal.hpp"

namespace sklarsomega {

enum class StructureKind { inter, gold, gold_regression, intra_inter, multi_method };

inline std::string to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::inter: return "inter";
    case StructureKind::gold: return "gold";
    case StructureKind::gold_regression: return "gold-regression";
    case StructureKind::intra_inter: return "intra-inter";
    case StructureKind::multi_method: return "multi-method";
  }
  return "unknown";
}

inline StructureKind parse_structure(std::string_view name) {
  if (name == "inter") return StructureKind::inter;
  if (name == "gold") return StructureKind::gold;
  if (name == "gold-regression") return StructureKind::gold_regression;
  if (name == "intra-inter") return StructureKind::intra_inter;
  if (name == "multi-method") return StructureKind::multi_method;
  throw ParseError("unknown correlation structure '" + std::string(name) + "'");
}

enum class Link { probit, logit };

inline std::string to_string(Link link) { return link == Link::probit ? "probit" : "logit"; }

inline Link parse_link(std::string_view name) {
  if (name == "probit") return Link::probit;
  if (name == "logit") return Link::logit;
  throw ParseError("unknown link '" + std::string(name) + "'");
}

inline double apply_link(Link link, double eta) {
  return link == Link::probit ? phi(eta) : 1.0 / (1.0 + std::exp(-eta));
}

inline constexpr double kOmegaUpper = 1.0 - 1e-6;
inline constexpr double kPositiveLower = 1e-6;
inline constexpr double kProbabilityLower = 1e-3;

/// Largest attainable correlation between Bernoulli(p1) and Bernoulli(p2).
inline double max_binary_correlation(double p1, double p2) {
  if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0))
    throw DomainError("max_binary_correlation: probabilities must lie in (0,1)");
  const double r = (p1 * (1.0 - p2)) / (p2 * (1.0 - p1));
  return std::min(std::sqrt(r), std::sqrt(1.0 / r));
}

/// A correlation template laid out against the columns of one dataset.
class CorrelationStructure {
 public:
  CorrelationStructure() = default;

  /// `design` is used only by gold-regression: one row per coder (row c-1
  /// for coder c), one column per coefficient. Empty means intercept only.
  CorrelationStructure(StructureKind kind, std::vector<ColumnRole> roles,
                       Eigen::MatrixXd design = {}, Link link = Link::probit)
      : kind_(kind), roles_(std::move(roles)), design_(std::move(design)), link_(link) {
    layout();
  }

  StructureKind kind() const { return kind_; }
  Link link() const { return link_; }
  const Eigen::MatrixXd& design() const { return design_; }
  const std::vector<ColumnRole>& roles() const { return roles_; }
  std::size_t n_columns() const { return roles_.size(); }

  std::size_t n_params() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  /// Regression coefficients are unbounded; every other parameter is an
  /// agreement correlation in [0, 1 - 1e-6].
  bool is_coefficient(std::size_t k) const { return k < n_coef_; }
  double lower(std::size_t k) const { return is_coefficient(k) ? -kInf : 0.0; }
  double upper(std::size_t k) const { return is_coefficient(k) ? kInf : kOmegaUpper; }

  /// Starting values: 0.5 for correlations, 0 for coefficients except the
  /// intercept that makes H(x'beta) = 0.5 (also 0 for both links).
  std::vector<double> initial_values() const {
    std::vector<double> out(n_params(), 0.5);
    for (std::size_t k = 0; k < n_coef_; ++k) out[k] = 0.0;
    return out;
  }

  /// Correlation between columns a and b (a != b) at parameter vector omega.
  double entry(std::size_t a, std::size_t b, std::span<const double> omega) const {
    const Slot& s = slots_[a * roles_.size() + b];
    switch (s.type) {
      case SlotType::zero: return 0.0;
      case SlotType::param: return omega[s.index];
      case SlotType::regression: {
        double eta = 0.0;
        for (Eigen::Index j = 0; j < design_.cols(); ++j)
          eta += design_(static_cast<Eigen::Index>(s.index), j) * omega[static_cast<std::size_t>(j)];
        return apply_link(link_, eta);
      }
    }
    return 0.0;
  }

  /// Whether the pair is structurally uncorrelated (never depends on omega).
  bool structural_zero(std::size_t a, std::size_t b) const {
    return slots_[a * roles_.size() + b].type == SlotType::zero;
  }

  /// Correlation matrix over all columns at omega.
  Eigen::MatrixXd full_matrix(std::span<const double> omega) const {
    check_size(omega);
    const auto n = static_cast<Eigen::Index>(roles_.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b)
        m(a, b) = m(b, a) = entry(static_cast<std::size_t>(a), static_cast<std::size_t>(b), omega);
    return m;
  }

  /// The unit block restricted to the observed columns `pattern`.
  Eigen::MatrixXd build_block(std::span<const double> omega, std::span<const std::size_t> pattern) const {
    check_size(omega);
    if (pattern.empty()) throw DomainError("build_block: empty pattern");
    const auto m = static_cast<Eigen::Index>(pattern.size());
    Eigen::MatrixXd block = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i + 1; j < m; ++j)
        block(i, j) = block(j, i) =
            entry(pattern[static_cast<std::size_t>(i)], pattern[static_cast<std::size_t>(j)], omega);
    return block;
  }

 private:
  enum class SlotType { zero, param, regression };
  struct Slot {
    SlotType type = SlotType::zero;
    std::size_t index = 0;
  };

  void check_size(std::span<const double> omega) const {
    if (omega.size() != n_params()) throw DomainError("correlation parameter count mismatch");
  }

  std::size_t param(const std::string& name) {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it != names_.end()) return static_cast<std::size_t>(it - names_.begin());
    names_.push_back(name);
    return names_.size() - 1;
  }

  void layout() {
    const std::size_t n = roles_.size();
    const bool has_gold = std::any_of(roles_.begin(), roles_.end(), [](auto& r) { return r.gold; });
    const bool wants_gold = kind_ == StructureKind::gold || kind_ == StructureKind::gold_regression;
    if (wants_gold && !has_gold)
      throw DomainError(to_string(kind_) + " structure needs a gold-standard column");
    if ((kind_ == StructureKind::inter || kind_ == StructureKind::intra_inter) && has_gold)
      throw DomainError(to_string(kind_) + " structure does not model a gold-standard column");

    if (kind_ == StructureKind::gold_regression) {
      int max_coder = 0;
      for (const auto& r : roles_)
        if (!r.gold) max_coder = std::max(max_coder, r.coder);
      if (design_.size() == 0) design_ = Eigen::MatrixXd::Ones(max_coder, 1);
      if (design_.rows() < max_coder)
        throw DomainError("gold-regression design needs one row per coder");
      n_coef_ = static_cast<std::size_t>(design_.cols());
      for (std::size_t j = 0; j < n_coef_; ++j) names_.push_back("beta" + std::to_string(j + 1));
    }

    // Parameters are created in a fixed order so names are stable.
    std::set<std::pair<int, int>> replicated;  // (method, coder) with >= 2 scores
    std::set<int> methods;
    std::map<int, std::set<int>> coders_of;
    {
      std::map<std::pair<int, int>, int> count;
      for (const auto& r : roles_) {
        if (r.gold) continue;
        ++count[{r.method, r.coder}];
        methods.insert(r.method);
        coders_of[r.method].insert(r.coder);
      }
      for (auto& [key, c] : count)
        if (c >= 2) replicated.insert(key);
    }

    switch (kind_) {
      case StructureKind::inter: param("inter"); break;
      case StructureKind::gold: param("gold"); param("inter"); break;
      case StructureKind::gold_regression: param("inter"); break;
      case StructureKind::intra_inter: {
        std::map<int, int> per_coder;
        for (const auto& r : roles_) ++per_coder[r.coder];
        for (const auto& [c, count] : per_coder)
          if (count >= 2) param("intra" + std::to_string(c));
        if (per_coder.size() >= 2) param("inter");
        break;
      }
      case StructureKind::multi_method: {
        if (has_gold) param("gold");
        for (int m : methods) {
          for (const auto& [mm, c] : replicated)
            if (mm == m) param("intra" + std::to_string(m) + "." + std::to_string(c));
          if (coders_of[m].size() >= 2) param("inter" + std::to_string(m));
        }
        if (methods.size() >= 2) param("cross");
        break;
      }
    }

    slots_.assign(n * n, Slot{});
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        slots_[a * n + b] = classify(roles_[a], roles_[b]);
      }
    }
  }

  Slot classify(const ColumnRole& x, const ColumnRole& y) {
    auto p = [&](const std::string& name) { return Slot{SlotType::param, index_of(name)}; };
    if (x.gold || y.gold) {
      const ColumnRole& c = x.gold ? y : x;
      switch (kind_) {
        case StructureKind::gold: return p("gold");
        case StructureKind::gold_regression:
          return Slot{SlotType::regression, static_cast<std::size_t>(c.coder - 1)};
        case StructureKind::multi_method:
          return c.method == 1 ? p("gold") : Slot{};
        default: return Slot{};
      }
    }
    switch (kind_) {
      case StructureKind::inter:
      case StructureKind::gold:
      case StructureKind::gold_regression: return p("inter");
      case StructureKind::intra_inter:
        return x.coder == y.coder ? p("intra" + std::to_string(x.coder)) : p("inter");
      case StructureKind::multi_method:
        if (x.method != y.method) return p("cross");
        if (x.coder == y.coder)
          return p("intra" + std::to_string(x.method) + "." + std::to_string(x.coder));
        return p("inter" + std::to_string(x.method));
    }
    return Slot{};
  }

  std::size_t index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw Error("correlation layout: missing parameter " + name);
    return static_cast<std::size_t>(it - names_.begin());
  }

  StructureKind kind_ = StructureKind::inter;
  std::vector<ColumnRole> roles_;
  Eigen::MatrixXd design_;
  Link link_ = Link::probit;
  std::vector<std::string> names_;
  std::size_t n_coef_ = 0;
  std::vector<Slot> slots_;
};

/// Flat parameter vector theta = (correlation part, margin part) with
/// names and box bounds. Categorical margins carry p_1..p_{K-1}; p_K is
/// the complement.
struct PackedParams {
  std::vector<double> theta;
  std::vector<std::string> names;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t n_omega = 0;

  std::size_t size() const { return theta.size(); }
  std::span<const double> omega() const { return {theta.data(), n_omega}; }
  std::span<const double> psi() const { return {theta.data() + n_omega, theta.size() - n_omega}; }
};

inline std::vector<std::string> margin_param_names(MarginKind kind, int categories) {
  switch (kind) {
    case MarginKind::gaussian:
    case MarginKind::laplace: return {"mu", "sigma"};
    case MarginKind::t: return {"mu", "nu"};
    case MarginKind::gamma: return {"shape", "rate"};
    case MarginKind::beta: return {"alpha", "beta"};
    case MarginKind::categorical: {
      std::vector<std::string> out;
      for (int k = 1; k < categories; ++k) out.push_back("p" + std::to_string(k));
      return out;
    }
  }
  return {};
}

inline void margin_bounds(MarginKind kind, std::size_t n_free, std::vector<double>& lower,
                          std::vector<double>& upper) {
  for (std::size_t k = 0; k < n_free; ++k) {
    const bool location = k == 0 && (kind == MarginKind::gaussian || kind == MarginKind::laplace ||
                                      kind == MarginKind::t);
    if (kind == MarginKind::categorical) {
      lower.push_back(kProbabilityLower);
      upper.push_back(1.0 - kProbabilityLower);
    } else if (location) {
      lower.push_back(-kInf);
      upper.push_back(kInf);
    } else {
      lower.push_back(kPositiveLower);
      upper.push_back(kInf);
    }
  }
}

/// Pack correlation values and a margin (may be absent, as for the
/// semiparametric second stage).
inline PackedParams pack(const CorrelationStructure& s, std::span<const double> omega,
                         const MarginalFamily* margin) {
  if (omega.size() != s.n_params()) throw DomainError("pack: correlation parameter count mismatch");
  PackedParams out;
  out.n_omega = s.n_params();
  out.theta.assign(omega.begin(), omega.end());
  out.names = s.names();
  for (std::size_t k = 0; k < s.n_params(); ++k) {
    out.lower.push_back(s.lower(k));
    out.upper.push_back(s.upper(k));
  }
  if (margin) {
    std::vector<double> free = margin->psi;
    if (margin->kind == MarginKind::categorical) free.pop_back();
    auto names = margin_param_names(margin->kind, margin->categories());
    out.names.insert(out.names.end(), names.begin(), names.end());
    out.theta.insert(out.theta.end(), free.begin(), free.end());
    margin_bounds(margin->kind, free.size(), out.lower, out.upper);
  }
  return out;
}

/// Margin encoded in the psi part of theta. For categorical margins the
/// returned family has p_K = 1 - sum of the free probabilities, which may be
/// tiny or negative for infeasible theta; check `valid()`.
inline MarginalFamily unpack_margin(MarginKind kind, std::span<const double> psi) {
  MarginalFamily f{kind, {psi.begin(), psi.end()}};
  if (kind == MarginKind::categorical) {
    double s = 0.0;
    for (double p : psi) s += p;
    f.psi.push_back(1.0 - s);
  }
  return f;
}

}  // namespace sklarsomega
