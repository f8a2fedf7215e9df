#pragma once

// Standard errors and intervals: observed information, the sandwich with a
// simulated score variance, and parametric bootstrap refits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>

#include "sklarsomega/error.hpp"
#include "sklarsomega/estimation.hpp"
#include "sklarsomega/normal.hpp"
#include "sklarsomega/objectives.hpp"
#include "sklarsomega/optimizer.hpp"
#include "sklarsomega/parallel.hpp"
#include "sklarsomega/rng.hpp"
#include "sklarsomega/simulate.hpp"
#include "sklarsomega/stats.hpp"

namespace sklarsomega {

enum class IntervalKind { asymptotic, sandwich, bootstrap_gaussian, bootstrap_quantile };

inline std::string to_string(IntervalKind k) {
  switch (k) {
    case IntervalKind::asymptotic: return "asymptotic";
    case IntervalKind::sandwich: return "sandwich";
    case IntervalKind::bootstrap_gaussian: return "bootstrap-gaussian";
    case IntervalKind::bootstrap_quantile: return "bootstrap-quantile";
  }
  return "unknown";
}

struct ParameterInterval {
  std::string name;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double se = std::numeric_limits<double>::quiet_NaN();
  double mcse_lower = 0.0;  // zero for non-simulation intervals
  double mcse_upper = 0.0;
};

struct UncertaintySummary {
  IntervalKind kind = IntervalKind::asymptotic;
  double level = 0.95;
  Eigen::MatrixXd covariance;                  // over the packed parameters
  std::vector<std::vector<double>> bootstrap;  // replicate x reported parameter
  std::size_t n_boot = 0;
  std::size_t failed = 0;
  std::vector<ParameterInterval> intervals;
  std::vector<std::string> warnings;
};

/// Log objective as a function of theta, wrapped for finite differencing.
inline ObjectiveFn log_objective(const Objective& obj) {
  return [&obj](std::span<const double> t) { return obj(t); };
}

/// Gradient of the log objective at theta (bound-aware central differences).
inline std::vector<double> score(const Objective& obj, std::span<const double> theta, std::span<const double> lo,
                                 std::span<const double> hi) {
  return fd_gradient(log_objective(obj), theta, obj(theta), lo, hi);
}

/// Negative Hessian of the log objective by differencing the finite
/// difference gradient; symmetrized.
inline Eigen::MatrixXd observed_information(const ObjectiveFn& logf, std::span<const double> theta,
                                            std::span<const double> lo, std::span<const double> hi) {
  const std::size_t q = theta.size();
  static const double rel = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  auto grad = [&](std::span<const double> t) { return fd_gradient(logf, t, logf(t), lo, hi); };
  Eigen::MatrixXd H(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
  std::vector<double> probe(theta.begin(), theta.end());
  for (std::size_t i = 0; i < q; ++i) {
    const double h = rel * std::max(std::abs(theta[i]), 1.0);
    const bool up = theta[i] + h <= hi[i], down = theta[i] - h >= lo[i];
    std::vector<double> gp, gm;
    double width = 0.0;
    if (up && down) {
      probe[i] = theta[i] + h;
      gp = grad(probe);
      probe[i] = theta[i] - h;
      gm = grad(probe);
      width = 2.0 * h;
    } else if (up) {
      probe[i] = theta[i] + h;
      gp = grad(probe);
      gm = grad(theta);
      width = h;
    } else {
      gp = grad(theta);
      probe[i] = theta[i] - h;
      gm = grad(probe);
      width = h;
    }
    probe[i] = theta[i];
    for (std::size_t j = 0; j < q; ++j)
      H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = -(gp[j] - gm[j]) / width;
  }
  return 0.5 * (H + H.transpose());
}

inline Eigen::MatrixXd observed_information(const Objective& obj, const PackedParams& p) {
  return observed_information(log_objective(obj), p.theta, p.lower, p.upper);
}

inline Eigen::MatrixXd observed_information(const Fit& f) {
  const Objective obj = objective_for(f, f.data);
  return observed_information(obj, f.params);
}

/// Inverse of a symmetric matrix; falls back to the eigenvalue
/// pseudo-inverse (with a warning) when it is not positive definite.
inline Eigen::MatrixXd information_inverse(const Eigen::MatrixXd& info, std::vector<std::string>* warnings) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  const auto& ev = es.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() > tol) return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  if (warnings) warnings->push_back("information matrix is not positive definite; using a pseudo-inverse");
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > tol) inv[i] = 1.0 / ev[i];
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Sandwich covariance I^{-1} J I^{-1}, where J is the mean outer product
/// of scores at theta-hat over n_boot datasets simulated from the fit.
inline Eigen::MatrixXd sandwich_variance(const Fit& f, std::size_t n_boot, std::uint64_t seed, std::size_t workers = 1,
                                         std::vector<std::string>* warnings = nullptr) {
  if (n_boot < 2) throw DomainError("sandwich_variance: need at least two simulated datasets");
  const auto q = static_cast<Eigen::Index>(f.n_params());
  const Eigen::MatrixXd info = observed_information(f);
  std::vector<Eigen::VectorXd> scores(n_boot);
  parallel_for(n_boot, workers, [&](std::size_t b) {
    Rng rng(seed, b);
    const AgreementData sim = simulate_from_fit(f, rng);
    const Objective obj = objective_for(f, sim);
    const auto g = score(obj, f.params.theta, f.params.lower, f.params.upper);
    scores[b] = Eigen::Map<const Eigen::VectorXd>(g.data(), q);
  });
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (const auto& s : scores) J += s * s.transpose();
  J /= static_cast<double>(n_boot);
  const Eigen::MatrixXd inv = information_inverse(info, warnings);
  const Eigen::MatrixXd c = inv * J * inv;
  return 0.5 * (c + c.transpose());
}

struct BootstrapSample {
  std::vector<std::vector<double>> draws;  // replicate x reported parameter
  std::size_t failed = 0;
  std::vector<std::string> warnings;
};

/// Parametric bootstrap: simulate from the fit (same missingness), refit,
/// keep the reported estimates. For SMP fits the simulation draws from the
/// first-stage ECDF and each refit re-estimates it, which is the
/// semiparametric bootstrap.
inline BootstrapSample full_bootstrap(const Fit& f, std::size_t n_boot, std::uint64_t seed, std::size_t workers = 1) {
  std::vector<std::optional<std::vector<double>>> slots(n_boot);
  parallel_for(n_boot, workers, [&](std::size_t b) {
    Rng rng(seed, b);
    try {
      const AgreementData sim = simulate_from_fit(f, rng);
      FitOptions o = f.options;
      o.model.method = f.method;
      o.model.margin = f.margin_kind;
      o.drop_singleton_units = false;  // the layout already excludes them
      o.start.reset();
      const Fit r = fit(sim, o);
      if (r.converged) slots[b] = r.reported_estimates();
    } catch (const Error&) {
    }
  });
  BootstrapSample out;
  for (auto& s : slots) {
    if (s)
      out.draws.push_back(std::move(*s));
    else
      ++out.failed;
  }
  if (out.failed > 0) {
    if (static_cast<double>(out.failed) >= 0.02 * static_cast<double>(n_boot))
      throw FitError("bootstrap: " + std::to_string(out.failed) + " of " + std::to_string(n_boot) +
                     " replicates failed to converge");
    out.warnings.push_back(std::to_string(out.failed) + " bootstrap replicates failed and were dropped");
  }
  return out;
}

/// Standard errors of the reported estimates from a covariance over the
/// packed parameters; the categorical complement p_K gets 1'C1 over the
/// free probabilities.
inline std::vector<double> reported_standard_errors(const Fit& f, const Eigen::MatrixXd& cov) {
  std::vector<double> se;
  for (Eigen::Index k = 0; k < cov.rows(); ++k) se.push_back(std::sqrt(std::max(cov(k, k), 0.0)));
  if (f.margin_kind == MarginKind::categorical && f.method != Method::SMP) {
    const auto n0 = static_cast<Eigen::Index>(f.params.n_omega);
    const auto m = cov.rows() - n0;
    se.push_back(std::sqrt(std::max(cov.block(n0, n0, m, m).sum(), 0.0)));
  }
  return se;
}

inline UncertaintySummary intervals_from_covariance(const Fit& f, const Eigen::MatrixXd& cov, IntervalKind kind,
                                                    double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
  UncertaintySummary out;
  out.kind = kind;
  out.level = level;
  out.covariance = cov;
  const double z = phi_inv(0.5 + level / 2.0);
  const auto est = f.reported_estimates();
  const auto names = f.reported_names();
  const auto se = reported_standard_errors(f, cov);
  for (std::size_t k = 0; k < est.size(); ++k)
    out.intervals.push_back({names[k], est[k], est[k] - z * se[k], est[k] + z * se[k], se[k], 0.0, 0.0});
  return out;
}

inline UncertaintySummary intervals_from_bootstrap(const Fit& f, BootstrapSample sample, IntervalKind kind,
                                                   double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
  const std::size_t n = sample.draws.size();
  if (n < 2) throw FitError("bootstrap: too few successful replicates");
  if (kind == IntervalKind::bootstrap_quantile && n < 30)
    throw DomainError("quantile bootstrap intervals need at least 30 replicates");
  UncertaintySummary out;
  out.kind = kind;
  out.level = level;
  out.n_boot = n + sample.failed;
  out.failed = sample.failed;
  out.warnings = std::move(sample.warnings);
  const auto est = f.reported_estimates();
  const auto names = f.reported_names();
  const double z = phi_inv(0.5 + level / 2.0);
  const double tail = (1.0 - level) / 2.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    std::vector<double> col;
    col.reserve(n);
    for (const auto& d : sample.draws) col.push_back(d[k]);
    ParameterInterval iv{names[k], est[k], 0.0, 0.0, stats::sd(col), 0.0, 0.0};
    if (kind == IntervalKind::bootstrap_quantile) {
      std::sort(col.begin(), col.end());
      iv.lower = stats::quantile_sorted(col, tail);
      iv.upper = stats::quantile_sorted(col, 1.0 - tail);
      iv.mcse_lower = stats::quantile_mcse(col, tail);
      iv.mcse_upper = stats::quantile_mcse(col, 1.0 - tail);
    } else {
      iv.lower = est[k] - z * iv.se;
      iv.upper = est[k] + z * iv.se;
      iv.mcse_lower = iv.mcse_upper = z * stats::sd_mcse(col);
    }
    out.intervals.push_back(iv);
  }
  out.bootstrap = std::move(sample.draws);
  return out;
}

/// Clip correlation-parameter intervals to [0, 1] (for display).
inline void truncate_intervals(const Fit& f, UncertaintySummary& s) {
  for (std::size_t k = 0; k < f.params.n_omega && k < s.intervals.size(); ++k) {
    if (f.structure.is_coefficient(k)) continue;
    s.intervals[k].lower = std::clamp(s.intervals[k].lower, 0.0, 1.0);
    s.intervals[k].upper = std::clamp(s.intervals[k].upper, 0.0, 1.0);
  }
}

enum class ConfintKind { none, asymptotic, bootstrap };

inline ConfintKind parse_confint(std::string_view name) {
  if (name == "none") return ConfintKind::none;
  if (name == "asymptotic") return ConfintKind::asymptotic;
  if (name == "bootstrap") return ConfintKind::bootstrap;
  throw ParseError("unknown interval kind '" + std::string(name) + "'");
}

inline std::string to_string(ConfintKind k) {
  switch (k) {
    case ConfintKind::none: return "none";
    case ConfintKind::asymptotic: return "asymptotic";
    case ConfintKind::bootstrap: return "bootstrap";
  }
  return "unknown";
}

struct ConfintOptions {
  ConfintKind kind = ConfintKind::asymptotic;
  std::size_t n_boot = 1000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  double level = 0.95;
  /// Bootstrap interval style; empty picks Gaussian for SMP fits and
  /// median-unbiased quantiles otherwise.
  std::optional<IntervalKind> bootstrap_style;
};

/// Intervals for a fit. Asymptotic intervals use the inverse observed
/// information for ML and SMP fits and the sandwich for DT and CML fits.
inline UncertaintySummary confidence_intervals(const Fit& f, const ConfintOptions& o) {
  if (o.kind == ConfintKind::none) throw DomainError("confidence_intervals: no interval requested");
  if (o.kind == ConfintKind::asymptotic) {
    std::vector<std::string> warnings;
    UncertaintySummary s;
    if (f.method == Method::DT || f.method == Method::CML) {
      s = intervals_from_covariance(f, sandwich_variance(f, o.n_boot, o.seed, o.workers, &warnings),
                                    IntervalKind::sandwich, o.level);
      s.n_boot = o.n_boot;
    } else {
      s = intervals_from_covariance(f, information_inverse(observed_information(f), &warnings),
                                    IntervalKind::asymptotic, o.level);
    }
    s.warnings = std::move(warnings);
    return s;
  }
  const IntervalKind style = o.bootstrap_style.value_or(
      f.method == Method::SMP ? IntervalKind::bootstrap_gaussian : IntervalKind::bootstrap_quantile);
  return intervals_from_bootstrap(f, full_bootstrap(f, o.n_boot, o.seed, o.workers), style, o.level);
}

/// Whether theta lies in the asymptotic confidence ellipsoid
/// (theta-hat - theta)' I (theta-hat - theta) <= chi^2_q(level).
inline bool in_confidence_ellipsoid(const Fit& f, const Eigen::MatrixXd& info, std::span<const double> theta,
                                    double level = 0.95) {
  const auto q = static_cast<Eigen::Index>(f.n_params());
  if (static_cast<Eigen::Index>(theta.size()) != q || info.rows() != q)
    throw DomainError("ellipsoid: dimension mismatch");
  Eigen::VectorXd d(q);
  for (Eigen::Index k = 0; k < q; ++k) d[k] = f.params.theta[static_cast<std::size_t>(k)] - theta[static_cast<std::size_t>(k)];
  const boost::math::chi_squared_distribution<double> chi(static_cast<double>(q));
  return d.dot(info * d) <= boost::math::quantile(chi, level);
}

}  // namespace sklarsomega
