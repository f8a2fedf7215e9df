#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library routine they check.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sklarsomega/sklarsomega.hpp"

namespace oracle {

inline double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<>(), x); }
inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

// P(X <= a, Y <= b) for a standard bivariate normal with correlation rho by
// nested adaptive Gauss-Kronrod over the joint density.
inline double bvn_cdf_quadrature(double a, double b, double rho) {
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  const double s = std::sqrt(1.0 - rho * rho);
  const double c = 1.0 / (2.0 * std::numbers::pi * s);
  auto inner = [&](double x) {
    auto density = [&](double y) {
      return c * std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * s * s));
    };
    // the conditional mode rho*x splits the y range so the peak is resolved
    const double m = std::min(rho * x, b);
    double v = gauss_kronrod<double, 61>::integrate(density, -inf, m, 10, 1e-12);
    if (m < b) v += gauss_kronrod<double, 61>::integrate(density, m, b, 10, 1e-12);
    return v;
  };
  const double m = std::min(0.0, a);
  double v = gauss_kronrod<double, 61>::integrate(inner, -inf, m, 10, 1e-12);
  if (m < a) v += gauss_kronrod<double, 61>::integrate(inner, m, a, 10, 1e-12);
  return v;
}

// log|A| and z'A^{-1}z of the dense matrix assembled from the blocks.
inline std::pair<double, double> dense_logdet_quadform(const std::vector<Eigen::MatrixXd>& blocks,
                                                       const std::vector<double>& z) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    a.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  const Eigen::Map<const Eigen::VectorXd> zv(z.data(), n);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  const double logdet = std::log(std::abs(lu.determinant()));
  return {logdet, zv.dot(lu.solve(zv))};
}

// Gaussian-copula log-likelihood of continuous data evaluated directly as
// sum_u [ log N_m(z_u; 0, Omega_u) - sum log phi(z_ui) + sum log f(y_ui) ],
// with the full correlation matrix handed in explicitly.
inline double copula_loglik_direct(const sklarsomega::AgreementData& d, const Eigen::MatrixXd& omega_full,
                                   const sklarsomega::MarginalFamily& f) {
  double ll = 0.0;
  for (std::size_t u = 0; u < d.n_units(); ++u) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < d.n_columns(); ++c)
      if (d.observed(u, c)) cols.push_back(c);
    const auto m = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd s(m, m);
    Eigen::VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double y = d.value(u, cols[static_cast<std::size_t>(i)]);
      z[i] = normal_quantile(sklarsomega::cdf(f, y));
      ll += sklarsomega::log_pdf(f, y) + 0.5 * z[i] * z[i] + 0.5 * std::log(2.0 * std::numbers::pi);
      for (Eigen::Index j = 0; j < m; ++j)
        s(i, j) = omega_full(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(i)]),
                             static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]));
    }
    const double det = s.determinant();
    ll += -0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) -
          0.5 * z.dot(s.inverse() * z);
  }
  return ll;
}

// Largest Pearson correlation of a 2x2 table with margins p1, p2, by scanning
// the joint cell P(1,1) on a fine grid.
inline double max_binary_correlation_scan(double p1, double p2, int steps = 200000) {
  const double lo = std::max(0.0, p1 + p2 - 1.0), hi = std::min(p1, p2);
  double best = -1.0;
  for (int i = 0; i <= steps; ++i) {
    const double p11 = lo + (hi - lo) * i / steps;
    best = std::max(best, (p11 - p1 * p2) / std::sqrt(p1 * (1 - p1) * p2 * (1 - p2)));
  }
  return best;
}

// Krippendorff's alpha straight from the definition: coincidence matrix
// o_ck, marginals n_c, and a difference table delta^2(c, k).
inline double alpha_coincidence(const std::vector<std::vector<double>>& units, sklarsomega::Level level) {
  std::vector<double> values;
  for (const auto& u : units)
    if (u.size() >= 2)
      for (double v : u) values.push_back(v);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t V = values.size();
  auto idx = [&](double v) { return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin()); };
  std::vector<std::vector<double>> o(V, std::vector<double>(V, 0.0));
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    const double w = 1.0 / static_cast<double>(u.size() - 1);
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j) o[idx(u[i])][idx(u[j])] += w;
  }
  std::vector<double> nc(V, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < V; ++c)
    for (std::size_t k = 0; k < V; ++k) nc[c] += o[c][k];
  for (double x : nc) n += x;
  auto delta2 = [&](std::size_t c, std::size_t k) -> double {
    if (c == k) return 0.0;
    const double a = values[c], b = values[k];
    switch (level) {
      case sklarsomega::Level::nominal: return 1.0;
      case sklarsomega::Level::interval: return (a - b) * (a - b);
      case sklarsomega::Level::ratio: return ((a - b) / (a + b)) * ((a - b) / (a + b));
      case sklarsomega::Level::ordinal: {
        const std::size_t g = std::min(c, k), h = std::max(c, k);
        double s = 0.0;
        for (std::size_t t = g; t <= h; ++t) s += nc[t];
        s -= (nc[g] + nc[h]) / 2.0;
        return s * s;
      }
    }
    return 0.0;
  };
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < V; ++c)
    for (std::size_t k = 0; k < V; ++k) {
      num += o[c][k] * delta2(c, k);
      den += nc[c] * nc[k] * delta2(c, k);
    }
  return 1.0 - (n - 1.0) * num / den;
}

// Per-unit expected information of (rho, mu, sigma) for a pair
// (Y1, Y2) ~ N(mu 1, sigma^2 [[1, rho], [rho, 1]]).
inline Eigen::Matrix3d exchangeable_pair_information(double rho, double sigma) {
  const double r2 = 1.0 - rho * rho;
  Eigen::Matrix3d i = Eigen::Matrix3d::Zero();
  i(0, 0) = (1.0 + rho * rho) / (r2 * r2);
  i(1, 1) = 2.0 / (sigma * sigma * (1.0 + rho));
  i(2, 2) = 4.0 / (sigma * sigma);
  i(0, 2) = i(2, 0) = -2.0 * rho / (sigma * r2);
  return i;
}

}  // namespace oracle
