#pragma once

// Standard normal and bivariate normal kernels plus block-diagonal Cholesky
// algebra used by every objective.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/special_functions/erf.hpp>

#include "sklarsomega/error.hpp"

namespace sklarsomega {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Standard normal CDF.
inline double phi(double z) {
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

/// Standard normal quantile. Throws DomainError unless 0 < p < 1.
inline double phi_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("phi_inv: probability must lie strictly inside (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

inline double log_normal_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

namespace detail {

// Gauss-Legendre half-node sets (6, 12 and 20 points) for the bivariate
// normal integrand.
inline constexpr std::array<double, 3> kGl6W{0.17132449237916975, 0.36076157304813894,
                                             0.46791393457269137};
inline constexpr std::array<double, 3> kGl6X{-0.932469514203152, -0.6612093864662645,
                                             -0.23861918608319693};
inline constexpr std::array<double, 6> kGl12W{0.04717533638651202, 0.10693932599531888,
                                              0.1600783285433461,  0.20316742672306565,
                                              0.23349253653835464, 0.2491470458134027};
inline constexpr std::array<double, 6> kGl12X{-0.9815606342467192, -0.9041172563704748,
                                              -0.7699026741943047, -0.5873179542866175,
                                              -0.3678314989981802, -0.1252334085114689};
inline constexpr std::array<double, 10> kGl20W{
    0.017614007139153273, 0.04060142980038622, 0.06267204833410944, 0.08327674157670467,
    0.10193011981724026,  0.11819453196151825, 0.13168863844917653, 0.14209610931838187,
    0.14917298647260366,  0.15275338713072578};
inline constexpr std::array<double, 10> kGl20X{
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513258, -0.8391169718222188,
    -0.7463319064601508, -0.636053680726515,  -0.5108670019508271, -0.37370608871541955,
    -0.2277858511416451, -0.07652652113349734};

// Upper orthant probability P(X > h, Y > k) for standard bivariate normal
// with correlation r, finite h and k.
inline double bvn_upper(double h, double k, double r) {
  std::span<const double> w, x;
  if (std::abs(r) < 0.3) {
    w = kGl6W;
    x = kGl6X;
  } else if (std::abs(r) < 0.75) {
    w = kGl12W;
    x = kGl12X;
  } else {
    w = kGl20W;
    x = kGl20X;
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < w.size(); ++i) {
      double sn = std::sin(asr * (x[i] + 1.0) / 2.0);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 - x[i]) / 2.0);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * two_pi) + phi(-h) * phi(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * phi(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        const double t = a * (sign * x[i] + 1.0);
        const double xs = t * t;
        const double rs = std::sqrt(1.0 - xs);
        const double asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0)
          bvn += a * w[i] * std::exp(asr) *
                 (std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + phi(-std::max(h, k));
  return -bvn + std::max(0.0, phi(-h) - phi(-k));
}

}  // namespace detail

/// P(X <= a, Y <= b) for a standard bivariate normal with correlation rho.
/// Arguments may be infinite; |rho| must be below 1.
inline double bvn_cdf(double a, double b, double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("bvn_cdf: |rho| must be < 1");
  if (std::isnan(a) || std::isnan(b)) throw DomainError("bvn_cdf: NaN argument");
  if (a == -kInf || b == -kInf) return 0.0;
  if (a == kInf) return b == kInf ? 1.0 : phi(b);
  if (b == kInf) return phi(a);
  if (rho == 0.0) return phi(a) * phi(b);
  return std::clamp(detail::bvn_upper(-a, -b, rho), 0.0, 1.0);
}

/// Symmetric positive definite blocks of a block-diagonal matrix, each held
/// with its Cholesky factor.
class BlockDiagonal {
 public:
  /// Factor and append a block. Returns false (and leaves the matrix
  /// unchanged) when the block is not numerically positive definite.
  bool add(const Eigen::MatrixXd& block) {
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) return false;
    const auto diag = llt.matrixLLT().diagonal();
    if ((diag.array() <= 1e-12).any() || !diag.allFinite()) return false;
    factors_.push_back(std::move(llt));
    return true;
  }

  std::size_t size() const { return factors_.size(); }

  std::size_t dimension() const {
    std::size_t n = 0;
    for (const auto& f : factors_) n += static_cast<std::size_t>(f.rows());
    return n;
  }

  double log_determinant() const {
    double s = 0.0;
    for (const auto& f : factors_) s += block_log_determinant(f);
    return s;
  }

  /// z' Omega^{-1} z with z laid out block after block.
  double quadratic_form(std::span<const double> z) const {
    if (z.size() != dimension()) throw DomainError("quadratic_form: dimension mismatch");
    double s = 0.0;
    std::size_t offset = 0;
    for (const auto& f : factors_) {
      const auto m = f.rows();
      Eigen::Map<const Eigen::VectorXd> zb(z.data() + offset, m);
      s += block_quadratic_form(f, zb);
      offset += static_cast<std::size_t>(m);
    }
    return s;
  }

  static double block_log_determinant(const Eigen::LLT<Eigen::MatrixXd>& f) {
    return 2.0 * f.matrixLLT().diagonal().array().log().sum();
  }

  template <class Vec>
  static double block_quadratic_form(const Eigen::LLT<Eigen::MatrixXd>& f, const Vec& z) {
    const Eigen::VectorXd w = f.matrixL().solve(z);
    return w.squaredNorm();
  }

 private:
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
};

struct LogdetQuadform {
  double log_determinant = 0.0;
  double quadratic_form = 0.0;
};

/// (log|Omega|, z' Omega^{-1} z) for a block-diagonal Omega. Empty when a
/// block is not positive definite.
inline std::optional<LogdetQuadform> logdet_and_quadform(std::span<const Eigen::MatrixXd> blocks,
                                                         std::span<const double> z) {
  BlockDiagonal bd;
  for (const auto& b : blocks)
    if (!bd.add(b)) return std::nullopt;
  return LogdetQuadform{bd.log_determinant(), bd.quadratic_form(z)};
}

}  // namespace sklarsomega
