#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace sklarsomega;

TEST(Uncertainty, ObservedInformationMatchesExchangeablePair) {
  Rng rng(7);
  const auto d = simulate_inter(0.5, MarginalFamily::gaussian(1.0, 2.0), 400, 2, Level::interval, rng);
  const Fit f = fit(d);
  ASSERT_TRUE(f.converged);
  // at the MLE of a full exponential family, observed = expected information
  const Eigen::Matrix3d expect =
      static_cast<double>(d.n_units()) * oracle::exchangeable_pair_information(f.params.theta[0], f.params.theta[2]);
  const Eigen::MatrixXd got = observed_information(f);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(got(i, j), expect(i, j), 0.02 * std::max(1.0, std::abs(expect(i, i)))) << i << "," << j;
}

TEST(Uncertainty, AsymptoticIntervalsBracketTheEstimate) {
  Rng rng(8);
  const auto d = simulate_inter(0.7, MarginalFamily::gaussian(0.0, 1.0), 60, 3, Level::interval, rng);
  const Fit f = fit(d);
  const auto s = confidence_intervals(f, {});
  ASSERT_EQ(s.intervals.size(), 3u);
  for (const auto& iv : s.intervals) {
    EXPECT_LT(iv.lower, iv.estimate);
    EXPECT_GT(iv.upper, iv.estimate);
    EXPECT_NEAR(iv.upper - iv.estimate, 1.959964 * iv.se, 1e-5);
  }
  const Eigen::MatrixXd info = observed_information(f);
  EXPECT_TRUE(in_confidence_ellipsoid(f, info, f.params.theta));
  std::vector<double> far = f.params.theta;
  far[0] = 0.05;
  EXPECT_FALSE(in_confidence_ellipsoid(f, info, far));
}

TEST(Uncertainty, BootstrapIsReproducible) {
  const Fit f = fixtures::reliability_dt_fit();
  ConfintOptions o;
  o.kind = ConfintKind::bootstrap;
  o.n_boot = 40;
  o.seed = 11;
  const auto a = confidence_intervals(f, o);
  o.workers = 3;
  const auto b = confidence_intervals(f, o);
  ASSERT_EQ(a.intervals.size(), 6u);
  for (std::size_t k = 0; k < a.intervals.size(); ++k) {
    EXPECT_EQ(a.intervals[k].lower, b.intervals[k].lower);
    EXPECT_EQ(a.intervals[k].upper, b.intervals[k].upper);
    EXPECT_GT(a.intervals[k].mcse_lower, 0.0);
  }
}

TEST(Uncertainty, SandwichIsSymmetricPositive) {
  const Fit f = fixtures::reliability_dt_fit();
  const Eigen::MatrixXd v = sandwich_variance(f, 100, 3);
  EXPECT_LT((v - v.transpose()).norm(), 1e-12);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(v).eigenvalues().minCoeff(), 0.0);
}
