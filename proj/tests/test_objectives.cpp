#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace sklarsomega;

namespace {

std::vector<ColumnRole> coders(int n) {
  std::vector<ColumnRole> r;
  for (int c = 1; c <= n; ++c) r.push_back(ColumnRole::score(1, c, 1));
  return r;
}

constexpr double NA = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST(Objective, MlMatchesDenseCopulaDensity) {
  const std::vector<double> v{1.2, 0.3, NA, -0.4, 0.1, 0.9, 2.0, 1.7, 1.1, NA, 0.5, -1.0, -0.2, 0.0, 0.3};
  const AgreementData d(5, coders(3), Level::interval, v);
  const CorrelationStructure s(StructureKind::inter, d.roles());
  const Objective obj(d, s, Method::ML, MarginKind::gaussian);
  for (double w : {0.0, 0.3, 0.85}) {
    for (auto f : {MarginalFamily::gaussian(0.4, 1.3), MarginalFamily::laplace(0.2, 0.8),
                   MarginalFamily::t(0.5, 6.0)}) {
      const Objective o(d, s, Method::ML, f.kind);
      std::vector<double> theta{w, f.psi[0], f.psi[1]};
      const double omega[] = {w};
      EXPECT_NEAR(o(theta), oracle::copula_loglik_direct(d, s.full_matrix(omega), f), 1e-10);
    }
  }
  const std::vector<double> bad{1.0, 0.0, 1.0};
  EXPECT_EQ(obj(bad), -kInf);
}

TEST(Objective, GoldStructureMatchesDenseCopulaDensity) {
  std::vector<ColumnRole> roles{ColumnRole::gold_standard()};
  for (auto r : coders(2)) roles.push_back(r);
  const std::vector<double> v{2.0, 1.5, 2.5, 3.1, 3.0, NA, 0.7, 1.9, 1.0, 4.0, 3.5, 3.8};
  const AgreementData d(4, roles, Level::ratio, v);
  const CorrelationStructure s(StructureKind::gold, roles);
  const Objective o(d, s, Method::ML, MarginKind::gamma);
  const auto f = MarginalFamily::gamma(3.0, 1.2);
  const std::vector<double> theta{0.8, 0.5, 3.0, 1.2};
  EXPECT_NEAR(o(theta), oracle::copula_loglik_direct(d, s.full_matrix(std::span(theta).first(2)), f), 1e-10);
}

TEST(Objective, RectanglesFormADistribution) {
  for (int K : {2, 3, 5}) {
    std::vector<double> cut(static_cast<std::size_t>(K) + 1);
    cut.front() = -kInf;
    cut.back() = kInf;
    for (int k = 1; k < K; ++k) cut[static_cast<std::size_t>(k)] = oracle::normal_quantile(double(k) / K - 0.03);
    for (double rho : {-0.6, 0.0, 0.4, 0.95}) {
      double total = 0.0;
      for (int a = 1; a <= K; ++a)
        for (int b = 1; b <= K; ++b) total += Objective::rectangle(cut, a, b, rho);
      EXPECT_NEAR(total, 1.0, 1e-10) << "K=" << K << " rho=" << rho;
    }
  }
  // independence factorizes
  const std::vector<double> cut{-kInf, oracle::normal_quantile(0.3), kInf};
  EXPECT_NEAR(Objective::rectangle(cut, 1, 2, 0.0), 0.3 * 0.7, 1e-14);
}

TEST(Objective, CmlIsSumOfPairLogProbabilities) {
  const std::vector<double> v{1, 2, 2, 2, 2, NA, 1, 1, 1};
  const AgreementData d(3, coders(3), Level::nominal, v);
  const CorrelationStructure s(StructureKind::inter, d.roles());
  const Objective o(d, s, Method::CML, MarginKind::categorical);
  const double p = 0.35, rho = 0.5;
  const std::vector<double> theta{rho, p};
  const double c = oracle::normal_quantile(p);
  const double p11 = oracle::bvn_cdf_quadrature(c, c, rho);
  const double p12 = p - p11, p22 = 1.0 - 2.0 * p + p11;
  const double expect = std::log(p12) * 2 + std::log(p22) + std::log(p22) + 3 * std::log(p11);
  EXPECT_NEAR(o(theta), expect, 1e-9);
}

TEST(Objective, DtMatchesDirectComputation) {
  const std::vector<double> v{1, 3, 2, 2, 2, NA, 3, 1, 3};
  const AgreementData d(3, coders(3), Level::nominal, v);
  const CorrelationStructure s(StructureKind::inter, d.roles());
  const Objective o(d, s, Method::DT, MarginKind::categorical);
  const std::vector<double> p{0.2, 0.5, 0.3};
  const double w = 0.6;
  const std::vector<double> theta{w, p[0], p[1]};
  const std::vector<double> mid{0.1, 0.45, 0.85};
  double expect = 0.0;
  for (std::size_t u = 0; u < 3; ++u) {
    std::vector<double> z;
    for (std::size_t c = 0; c < 3; ++c) {
      if (!d.observed(u, c)) continue;
      const auto k = static_cast<std::size_t>(d.value(u, c)) - 1;
      z.push_back(oracle::normal_quantile(mid[k]));
      expect += std::log(p[k]);
    }
    const auto m = static_cast<Eigen::Index>(z.size());
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(m, m, w);
    r.diagonal().setOnes();
    const Eigen::Map<Eigen::VectorXd> zv(z.data(), m);
    expect += -0.5 * std::log(r.determinant()) - 0.5 * zv.dot(r.inverse() * zv) + 0.5 * zv.squaredNorm();
  }
  EXPECT_NEAR(o(theta), expect, 1e-10);
}

TEST(Objective, SmpIsGaussianKernelOfScores) {
  const AgreementData d(2, coders(2), Level::interval, {0.1, 0.2, 0.3, 0.4});
  const CorrelationStructure s(StructureKind::inter, d.roles());
  const std::vector<double> z{0.5, -0.2, 1.0, 1.4};
  const Objective o(d, s, Method::SMP, MarginKind::gaussian, z);
  const double w = 0.7;
  Eigen::Matrix2d r;
  r << 1, w, w, 1;
  const auto [ld, q] = oracle::dense_logdet_quadform({r, r}, z);
  const std::vector<double> theta{w};
  EXPECT_NEAR(o(theta), -0.5 * ld - 0.5 * q, 1e-12);
  EXPECT_THROW(Objective(d, s, Method::SMP, MarginKind::gaussian, {1.0}), DomainError);
}

TEST(Objective, MethodCompatibility) {
  EXPECT_THROW(check_compatible(Method::ML, MarginKind::categorical, Level::nominal), FitError);
  EXPECT_THROW(check_compatible(Method::DT, MarginKind::gaussian, Level::interval), FitError);
  EXPECT_THROW(check_compatible(Method::SMP, MarginKind::categorical, Level::ordinal), FitError);
  EXPECT_THROW(check_compatible(Method::ML, MarginKind::gaussian, Level::nominal), FitError);
  EXPECT_NO_THROW(check_compatible(Method::CML, MarginKind::categorical, Level::ordinal));
  EXPECT_NO_THROW(check_compatible(Method::SMP, MarginKind::gaussian, Level::ratio));
}
