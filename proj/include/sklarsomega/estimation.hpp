#pragma once

// Model fitting: method defaults, starting values, optimization, AIC.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sklarsomega/correlation.hpp"
#include "sklarsomega/data.hpp"
#include "sklarsomega/error.hpp"
#include "sklarsomega/marginals.hpp"
#include "sklarsomega/normal.hpp"
#include "sklarsomega/objectives.hpp"
#include "sklarsomega/optimizer.hpp"

namespace sklarsomega {

/// interval/ratio -> ML, categorical with K <= 4 -> CML, otherwise DT.
inline Method default_method(Level level, int categories) {
  if (!is_categorical(level)) return Method::ML;
  return categories <= 4 ? Method::CML : Method::DT;
}

/// Default margin: categorical for nominal/ordinal, Gaussian for interval,
/// beta for ratio data inside (0,1) and gamma for other ratio data.
inline MarginKind default_margin(const AgreementData& data) {
  if (is_categorical(data.level())) return MarginKind::categorical;
  if (data.level() == Level::interval) return MarginKind::gaussian;
  const auto v = data.observed_values();
  const bool unit = std::all_of(v.begin(), v.end(), [](double y) { return y > 0.0 && y < 1.0; });
  return unit ? MarginKind::beta : MarginKind::gamma;
}

struct ModelSpec {
  StructureKind structure = StructureKind::inter;
  std::optional<MarginKind> margin;  // default_margin when empty
  std::optional<Method> method;      // default_method when empty
  Eigen::MatrixXd design;            // gold-regression covariates, one row per coder
  Link link = Link::probit;
  EcdfVariant ecdf = EcdfVariant::winsorized;  // SMP first stage
  std::optional<double> ecdf_tuning;
};

struct FitOptions {
  ModelSpec model;
  OptimizerOptions optimizer;
  /// Units with a single observed score carry no dependence information and
  /// are left out of the fit.
  bool drop_singleton_units = true;
  std::optional<std::vector<double>> start;
};

struct Fit {
  Method method = Method::ML;
  MarginKind margin_kind = MarginKind::gaussian;
  FitOptions options;
  AgreementData data;               // the data the objective saw
  std::vector<std::size_t> units;   // their indices in the input data
  CorrelationStructure structure;
  PackedParams params;              // estimates, names, bounds
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> trace;        // objective (log scale) per iteration
  std::vector<std::string> warnings;
  std::optional<EmpiricalCdf> ecdf;  // SMP only

  std::span<const double> omega() const { return params.omega(); }
  std::size_t n_params() const { return params.size(); }

  /// Fitted margin (absent for SMP, whose margin is the ECDF).
  std::optional<MarginalFamily> margin() const {
    if (method == Method::SMP) return std::nullopt;
    return unpack_margin(margin_kind, params.psi());
  }

  /// Estimates with the categorical complement p_K appended.
  std::vector<double> reported_estimates() const {
    std::vector<double> out = params.theta;
    if (margin_kind == MarginKind::categorical && method != Method::SMP) out.push_back(margin()->psi.back());
    return out;
  }

  std::vector<std::string> reported_names() const {
    std::vector<std::string> out = params.names;
    if (margin_kind == MarginKind::categorical && method != Method::SMP)
      out.push_back("p" + std::to_string(data.categories()));
    return out;
  }
};

namespace detail {

inline std::vector<std::size_t> fit_units(const AgreementData& data, bool drop_singletons) {
  std::vector<std::size_t> units;
  for (std::size_t u = 0; u < data.n_units(); ++u)
    if (!drop_singletons || data.observed_count(u) >= 2) units.push_back(u);
  return units;
}

// Latent scores Phi^{-1}(F_n(y)) for every observed cell (NaN elsewhere).
inline std::vector<double> smp_scores(const AgreementData& data, const EmpiricalCdf& ecdf) {
  std::vector<double> z(data.n_units() * data.n_columns(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t u = 0; u < data.n_units(); ++u)
    for (std::size_t c = 0; c < data.n_columns(); ++c) {
      if (!data.observed(u, c)) continue;
      const double p = ecdf(data.value(u, c));
      z[u * data.n_columns() + c] = p > 0.0 && p < 1.0 ? phi_inv(p) : (p <= 0.0 ? -kInf : kInf);
    }
  return z;
}

inline std::vector<double> categorical_start(std::vector<double> p) {
  for (double& x : p) x = std::max(x, 0.01);
  double s = 0.0;
  for (double x : p) s += x;
  for (double& x : p) x /= s;
  return p;
}

}  // namespace detail

/// An objective bound to `data` for the given model, together with the
/// parameter layout and (for SMP) the first-stage ECDF.
struct BoundObjective {
  Objective objective;
  CorrelationStructure structure;
  Method method;
  MarginKind margin;
  std::optional<EmpiricalCdf> ecdf;
};

inline BoundObjective bind_objective(const AgreementData& data, const ModelSpec& spec) {
  const MarginKind margin = spec.margin.value_or(default_margin(data));
  const Method method = spec.method.value_or(default_method(data.level(), data.categories()));
  check_compatible(method, margin, data.level());
  CorrelationStructure structure(spec.structure, data.roles(), spec.design, spec.link);
  std::optional<EmpiricalCdf> ecdf;
  std::vector<double> z;
  if (method == Method::SMP) {
    ecdf.emplace(data.observed_values(), spec.ecdf, spec.ecdf_tuning);
    z = detail::smp_scores(data, *ecdf);
  }
  Objective obj(data, structure, method, margin, std::move(z));
  return BoundObjective{std::move(obj), std::move(structure), method, margin, std::move(ecdf)};
}

/// Starting parameters: 0.5 for every correlation, init_params for the margin.
inline PackedParams initial_params(const AgreementData& data, const CorrelationStructure& structure,
                                   Method method, MarginKind margin) {
  const auto omega = structure.initial_values();
  if (method == Method::SMP) return pack(structure, omega, nullptr);
  const auto sample = data.observed_values();
  MarginalFamily f{margin, init_params(sample, margin, data.categories())};
  if (margin == MarginKind::categorical) f.psi = detail::categorical_start(f.psi);
  return pack(structure, omega, &f);
}

inline Fit fit(const AgreementData& input, const FitOptions& options = {}) {
  Fit out;
  out.options = options;
  out.units = detail::fit_units(input, options.drop_singleton_units);
  out.data = out.units.size() == input.n_units() ? input : select_units(input, out.units);
  out.data.require_estimable();

  BoundObjective bound = bind_objective(out.data, options.model);
  out.method = bound.method;
  out.margin_kind = bound.margin;
  out.structure = bound.structure;
  out.ecdf = bound.ecdf;

  PackedParams start = initial_params(out.data, out.structure, out.method, out.margin_kind);
  if (options.start) {
    if (options.start->size() != start.size()) throw FitError("starting vector has the wrong length");
    start.theta = *options.start;
  }
  const Objective& obj = bound.objective;
  auto negative = [&obj](std::span<const double> theta) {
    const double v = obj(theta);
    return std::isfinite(v) ? -v : kInf;
  };
  Projection simplex;
  if (out.margin_kind == MarginKind::categorical && out.method != Method::SMP) {
    const std::size_t first = start.n_omega, last = start.size();
    const auto lo = start.lower, hi = start.upper;
    simplex = [=](std::vector<double>& x) {
      project_capped_sum(x, first, last, lo, hi, 1.0 - kProbabilityLower);
    };
  }
  OptimizerResult r = minimize(negative, start.theta, start.lower, start.upper, options.optimizer, simplex);

  out.params = start;
  out.params.theta = r.x;
  out.loglik = -r.value;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.message = r.message;
  out.trace.reserve(r.trace.size());
  for (double v : r.trace) out.trace.push_back(-v);
  if (!out.converged) out.warnings.push_back("optimizer did not converge: " + r.message);
  return out;
}

/// The fitted model's objective re-bound to other data with the same column
/// layout (bootstrap replicates, simulated datasets).
inline Objective objective_for(const Fit& f, const AgreementData& data) {
  ModelSpec spec = f.options.model;
  spec.method = f.method;
  spec.margin = f.margin_kind;
  return bind_objective(data, spec).objective;
}

/// Refit the same model to other data (same options, fresh starting values).
inline Fit refit(const Fit& f, const AgreementData& data) {
  FitOptions o = f.options;
  o.model.method = f.method;
  o.model.margin = f.margin_kind;
  o.start.reset();
  return fit(data, o);
}

inline double aic(const Fit& f) { return 2.0 * static_cast<double>(f.n_params()) - 2.0 * f.loglik; }

struct ModelComparison {
  std::vector<double> aic;
  std::vector<double> probability;  // exp((AIC_min - AIC_i) / 2)
};

inline ModelComparison model_probabilities(std::span<const double> aics) {
  if (aics.empty()) throw DomainError("model_probabilities: no models");
  ModelComparison out;
  out.aic.assign(aics.begin(), aics.end());
  const double best = *std::min_element(aics.begin(), aics.end());
  for (double a : aics) out.probability.push_back(std::exp((best - a) / 2.0));
  return out;
}

inline ModelComparison model_probabilities(std::span<const Fit> fits) {
  if (fits.empty()) throw DomainError("model_probabilities: no models");
  std::vector<double> a;
  for (const auto& f : fits) {
    if (f.method != Method::ML) throw DomainError("model_probabilities: fits must use ML");
    if (!(f.data == fits.front().data)) throw DomainError("model_probabilities: fits use different data");
    a.push_back(aic(f));
  }
  return model_probabilities(std::span<const double>(a));
}

/// Verbal label for an agreement coefficient.
inline std::string interpret(double omega) {
  if (omega <= 0.2) return "Slight Agreement";
  if (omega <= 0.4) return "Fair Agreement";
  if (omega <= 0.6) return "Moderate Agreement";
  if (omega <= 0.8) return "Substantial Agreement";
  return "Near-Perfect Agreement";
}

}  // namespace sklarsomega
