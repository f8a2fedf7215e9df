#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace sklarsomega;

TEST(Normal, PhiAndInverse) {
  for (double z : {-8.0, -3.0, -0.5, 0.0, 1.0, 4.0}) {
    EXPECT_NEAR(phi(z), oracle::normal_cdf(z), 1e-15);
    EXPECT_NEAR(phi_inv(phi(z)), z, 1e-9 * std::max(1.0, std::abs(z)));
  }
  EXPECT_THROW(phi_inv(0.0), DomainError);
  EXPECT_THROW(phi_inv(1.0), DomainError);
}

TEST(Bvn, MatchesQuadratureOnGrid) {
  int n = 0;
  for (double a : {-2.5, -1.0, 0.0, 0.7, 2.0})
    for (double b : {-2.0, -0.3, 0.0, 1.2, 3.0})
      for (double r : {-0.95, -0.5, 0.0, 0.6, 0.95}) {
        EXPECT_NEAR(bvn_cdf(a, b, r), oracle::bvn_cdf_quadrature(a, b, r), 1e-10) << a << ' ' << b << ' ' << r;
        ++n;
      }
  EXPECT_EQ(n, 125);
}

TEST(Bvn, LimitsAndSymmetry) {
  EXPECT_NEAR(bvn_cdf(0, 0, 0), 0.25, 1e-15);
  EXPECT_NEAR(bvn_cdf(0, 0, 0.5), 1.0 / 3.0, 1e-14);  // 1/4 + asin(rho)/(2 pi)
  EXPECT_NEAR(bvn_cdf(0.3, -0.4, 0.2), bvn_cdf(-0.4, 0.3, 0.2), 1e-15);
  EXPECT_NEAR(bvn_cdf(kInf, 0.7, 0.4), phi(0.7), 1e-15);
  EXPECT_EQ(bvn_cdf(-kInf, 0.7, 0.4), 0.0);
  EXPECT_NEAR(bvn_cdf(1.0, 1.0, 1.0 - 1e-12), phi(1.0), 1e-5);
}

TEST(BlockDiagonal, MatchesDenseAlgebra) {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> nd;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<double> z;
  for (int m : {1, 2, 3, 4, 5, 3}) {
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = nd(gen);
    Eigen::MatrixXd s = a * a.transpose() + Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
    blocks.push_back(d.asDiagonal() * s * d.asDiagonal());
    for (int i = 0; i < m; ++i) z.push_back(nd(gen));
  }
  const auto got = logdet_and_quadform(blocks, z);
  ASSERT_TRUE(got.has_value());
  const auto [ld, qf] = oracle::dense_logdet_quadform(blocks, z);
  EXPECT_NEAR(got->log_determinant, ld, 1e-10);
  EXPECT_NEAR(got->quadratic_form, qf, 1e-10);
}

TEST(BlockDiagonal, RejectsIndefiniteBlock) {
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 1.5, 1.5, 1;
  BlockDiagonal bd;
  EXPECT_FALSE(bd.add(bad));
  EXPECT_EQ(bd.size(), 0u);
  EXPECT_FALSE(logdet_and_quadform(std::vector<Eigen::MatrixXd>{bad}, std::vector<double>{0.1, 0.2}).has_value());
}
