#pragma once

// Bound-constrained quasi-Newton minimization with finite-difference
// gradients. The objective may return +infinity for infeasible points.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sklarsomega/error.hpp"
#include "sklarsomega/normal.hpp"

namespace sklarsomega {

using ObjectiveFn = std::function<double(std::span<const double>)>;

/// Optional projection onto a convex subset of the box. It receives the
/// unclamped point and must return a point whose box clamp is feasible.
using Projection = std::function<void(std::vector<double>&)>;

struct OptimizerOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;  // projected-gradient infinity norm
  double relative_tolerance = 1e-10;  // relative objective decrease
};

struct OptimizerResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> trace;  // objective after each accepted iteration, starting value first
};

namespace detail {

inline double fd_step(double x) {
  static const double h = std::cbrt(std::numeric_limits<double>::epsilon());
  return h * std::max(std::abs(x), 1.0);
}

inline std::vector<double> project(std::vector<double> x, std::span<const double> lo,
                                   std::span<const double> hi, const Projection& extra = {}) {
  if (extra) extra(x);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  return x;
}

}  // namespace detail

/// Euclidean projection of x[first..last) onto {lo <= x <= hi, sum x <= total}:
/// clamp(x - lambda) with the smallest lambda >= 0 meeting the cap.
inline void project_capped_sum(std::vector<double>& x, std::size_t first, std::size_t last,
                               std::span<const double> lo, std::span<const double> hi, double total) {
  auto sum_at = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = first; i < last; ++i) s += std::clamp(x[i] - lambda, lo[i], hi[i]);
    return s;
  };
  if (sum_at(0.0) <= total) return;
  double a = 0.0, b = 1.0;
  while (sum_at(b) > total && b < 1e6) b *= 2.0;
  for (int it = 0; it < 200 && b - a > 1e-16 * std::max(1.0, b); ++it) {
    const double mid = 0.5 * (a + b);
    (sum_at(mid) > total ? a : b) = mid;
  }
  for (std::size_t i = first; i < last; ++i) x[i] = std::clamp(x[i] - b, lo[i], hi[i]);
}

/// Finite-difference gradient of f at x (f(x) = fx). Central differences
/// where both neighbours are inside the box and finite, one-sided otherwise;
/// a coordinate with no finite neighbour gets 0.
inline std::vector<double> fd_gradient(const ObjectiveFn& f, std::span<const double> x, double fx,
                                       std::span<const double> lo, std::span<const double> hi) {
  std::vector<double> g(x.size(), 0.0);
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = detail::fd_step(x[i]);
    double fp = kInf, fm = kInf;
    const double xp = x[i] + h, xm = x[i] - h;
    if (xp <= hi[i]) {
      probe[i] = xp;
      fp = f(probe);
    }
    if (xm >= lo[i]) {
      probe[i] = xm;
      fm = f(probe);
    }
    probe[i] = x[i];
    const bool okp = std::isfinite(fp), okm = std::isfinite(fm);
    if (okp && okm) {
      g[i] = (fp - fm) / (xp - xm);
    } else if (okp && std::isfinite(fx)) {
      g[i] = (fp - fx) / (xp - x[i]);
    } else if (okm && std::isfinite(fx)) {
      g[i] = (fx - fm) / (x[i] - xm);
    }
  }
  return g;
}

/// Minimize f over the box [lo, hi] by projected BFGS with an Armijo
/// backtracking search along the projected path.
inline OptimizerResult minimize(const ObjectiveFn& f, std::vector<double> x0, std::span<const double> lo,
                                std::span<const double> hi, const OptimizerOptions& options = {},
                                const Projection& extra = {}) {
  const std::size_t n = x0.size();
  if (lo.size() != n || hi.size() != n) throw DomainError("minimize: bound size mismatch");
  OptimizerResult res;
  std::vector<double> x = detail::project(std::move(x0), lo, hi, extra);
  double fx = f(x);
  if (!std::isfinite(fx)) throw FitError("objective is not finite at the starting value");
  res.trace.push_back(fx);
  std::vector<double> g = fd_gradient(f, x, fx, lo, hi);

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  bool fresh = true;  // H is the (scaled) identity

  auto projected_gradient_norm = [&](const std::vector<double>& xv, const std::vector<double>& gv) {
    double m = 0.0;
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = xv[i] - gv[i];
    p = detail::project(std::move(p), lo, hi, extra);
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(p[i] - xv[i]));
    return m;
  };

  for (int it = 0;; ++it) {
    if (projected_gradient_norm(x, g) < options.gradient_tolerance) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      break;
    }
    if (it >= options.max_iterations) {
      res.message = "iteration limit reached";
      break;
    }

    // Coordinates pinned at a bound with the gradient pushing outward stay fixed.
    std::vector<bool> free(n, true);
    for (std::size_t i = 0; i < n; ++i)
      if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)) free[i] = false;

    auto direction = [&](const Eigen::MatrixXd& B) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        if (!free[i]) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (free[j]) s -= B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * g[j];
        d[static_cast<Eigen::Index>(i)] = s;
      }
      return d;
    };

    // Direction restricted to the tangent cone of the feasible set at x.
    auto tangent = [&](Eigen::VectorXd d) {
      if (!extra) return d;
      const double dn = d.cwiseAbs().maxCoeff();
      if (!(dn > 0.0)) return d;
      const double eps = 1e-6 / dn;
      std::vector<double> probe(n);
      for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] + eps * d[static_cast<Eigen::Index>(i)];
      probe = detail::project(std::move(probe), lo, hi, extra);
      for (std::size_t i = 0; i < n; ++i) d[static_cast<Eigen::Index>(i)] = (probe[i] - x[i]) / eps;
      return d;
    };

    bool accepted = false;
    std::vector<double> xn;
    double fn = 0.0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::VectorXd d = tangent(direction(H));
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += g[i] * d[static_cast<Eigen::Index>(i)];
      if (!(slope < 0.0)) {
        H.setIdentity();
        fresh = true;
        d = tangent(direction(H));
      }
      double t = 1.0;
      if (fresh && it == 0) {
        const double dn = d.cwiseAbs().maxCoeff();
        if (dn > 0.1) t = 0.1 / dn;
      }
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        std::vector<double> trial(n);
        for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + t * d[static_cast<Eigen::Index>(i)];
        trial = detail::project(std::move(trial), lo, hi, extra);
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (trial[i] - x[i]);
        if (decrease >= 0.0) continue;
        const double ft = f(trial);
        if (std::isfinite(ft) && ft <= fx + 1e-4 * decrease) {
          xn = std::move(trial);
          fn = ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (fresh) break;
        H.setIdentity();
        fresh = true;
      }
    }
    bool coordinate_step = false;
    if (!accepted) {
      // At a kink (non-smooth margin) or a corner of the feasible set the
      // gradient can mislead; fall back to the best improving coordinate step,
      // doubled while it keeps improving. If none exists x is a local minimum.
      const double floor = fx - options.relative_tolerance * std::max(std::abs(fx), 1.0);
      double best = floor;
      std::vector<double> probe = x;
      for (std::size_t i = 0; i < n; ++i) {
        for (double sign : {1.0, -1.0}) {
          double step = sign * detail::fd_step(x[i]);
          double fbest_i = kInf;
          std::vector<double> xbest_i;
          for (int grow = 0; grow < 40; ++grow, step *= 2.0) {
            probe[i] = x[i] + step;
            if (probe[i] < lo[i] || probe[i] > hi[i]) break;
            if (extra && detail::project(probe, lo, hi, extra) != probe) break;
            const double fp = f(probe);
            if (!(fp < std::min(fbest_i, floor))) break;
            fbest_i = fp;
            xbest_i = probe;
          }
          probe[i] = x[i];
          if (fbest_i < best) {
            best = fbest_i;
            xn = std::move(xbest_i);
            fn = fbest_i;
            accepted = coordinate_step = true;
          }
        }
      }
    }
    if (!accepted) {
      res.converged = true;
      res.message = "no descent direction from the current point";
      res.iterations = it;
      break;
    }

    std::vector<double> gn = fd_gradient(f, xn, fn, lo, hi);
    Eigen::VectorXd s(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      s[static_cast<Eigen::Index>(i)] = xn[i] - x[i];
      y[static_cast<Eigen::Index>(i)] = gn[i] - g[i];
    }
    const double sy = s.dot(y);
    if (coordinate_step) {
      H.setIdentity();
      fresh = true;
    } else if (sy > 1e-10 * s.norm() * y.norm()) {
      if (fresh) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(H.rows(), H.cols());
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
      fresh = false;
    }

    const double change = fx - fn;
    const bool was_fresh = fresh;
    x = std::move(xn);
    g = std::move(gn);
    fx = fn;
    res.trace.push_back(fx);
    res.iterations = it + 1;
    if (change <= options.relative_tolerance * std::max(std::abs(fx), 1.0)) {
      // A stalled quasi-Newton step far from stationarity gets one retry
      // along the projected gradient before the stop is accepted.
      if (!was_fresh && projected_gradient_norm(x, g) > 1e-3) {
        H.setIdentity();
        fresh = true;
        continue;
      }
      res.converged = true;
      res.message = "relative objective change below tolerance";
      break;
    }
  }
  res.x = std::move(x);
  res.value = fx;
  return res;
}

}  // namespace sklarsomega
