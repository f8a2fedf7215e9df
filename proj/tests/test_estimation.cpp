#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace sklarsomega;

TEST(Optimizer, BoundedQuadratic) {
  auto f = [](std::span<const double> x) {
    return (x[0] - 3.0) * (x[0] - 3.0) + 2.0 * (x[1] + 1.0) * (x[1] + 1.0) + x[0] * x[1];
  };
  const std::vector<double> lo{0.0, 0.0}, hi{2.0, 5.0};
  const auto r = minimize(f, {1.0, 1.0}, lo, hi);
  ASSERT_TRUE(r.converged);
  // x1 pinned at 0, then x0 = 3 hits its upper bound 2
  EXPECT_NEAR(r.x[0], 2.0, 1e-6);
  EXPECT_NEAR(r.x[1], 0.0, 1e-6);
}

TEST(Optimizer, Rosenbrock) {
  auto f = [](std::span<const double> x) {
    return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
  };
  const std::vector<double> lo{-5, -5}, hi{5, 5};
  const auto r = minimize(f, {-1.2, 1.0}, lo, hi);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], 1.0, 2e-3);
}

TEST(Optimizer, CappedSimplex) {
  // maximize sum log p_k with p_3 = 1 - p_1 - p_2; optimum at 1/3 each
  auto f = [](std::span<const double> x) {
    const double p3 = 1.0 - x[0] - x[1];
    if (p3 <= 0.0) return kInf;
    return -(2 * std::log(x[0]) + std::log(x[1]) + std::log(p3));
  };
  const std::vector<double> lo{1e-3, 1e-3}, hi{1 - 1e-3, 1 - 1e-3};
  Projection cap = [&](std::vector<double>& x) { project_capped_sum(x, 0, 2, lo, hi, 1 - 1e-3); };
  const auto r = minimize(f, {0.9, 0.9}, lo, hi, {}, cap);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 0.5, 1e-5);
  EXPECT_NEAR(r.x[1], 0.25, 1e-5);
}

TEST(Optimizer, ProjectCappedSum) {
  std::vector<double> x{0.7, 0.6, 0.1};
  const std::vector<double> lo(3, 0.0), hi(3, 1.0);
  project_capped_sum(x, 0, 3, lo, hi, 1.0);
  EXPECT_NEAR(x[0], 0.55, 1e-12);
  EXPECT_NEAR(x[1], 0.45, 1e-12);
  EXPECT_NEAR(x[2], 0.0, 1e-12);
}

TEST(Estimation, ReliabilityDataDistributionalTransform) {
  const Fit f = fixtures::reliability_dt_fit();
  ASSERT_TRUE(f.converged);
  EXPECT_EQ(f.data.n_units(), 11u);
  EXPECT_NEAR(f.loglik, -40.42, 0.01);
  EXPECT_NEAR(f.omega()[0], 0.894, 0.002);
  const auto est = f.reported_estimates();
  const std::vector<double> p{0.252, 0.241, 0.227, 0.189, 0.091};
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(est[k + 1], p[k], 0.003);
  double s = 0.0;
  for (std::size_t k = 1; k < est.size(); ++k) s += est[k];
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_GE(f.trace.back(), f.trace.front());
}

TEST(Estimation, GaussianMlRecoversSimulatedTruth) {
  Rng rng(42);
  const auto d = simulate_inter(0.6, MarginalFamily::gaussian(5.0, 2.0), 2000, 3, Level::interval, rng);
  const Fit f = fit(d);
  ASSERT_TRUE(f.converged);
  EXPECT_EQ(f.method, Method::ML);
  EXPECT_NEAR(f.omega()[0], 0.6, 0.03);
  EXPECT_NEAR(f.params.theta[1], 5.0, 0.1);
  EXPECT_NEAR(f.params.theta[2], 2.0, 0.1);
}

TEST(Estimation, ModelProbabilities) {
  const std::vector<double> a{3605, 3643, 3588};
  const auto m = model_probabilities(std::span<const double>(a));
  EXPECT_NEAR(m.probability[0], std::exp(-8.5), 1e-15);
  EXPECT_NEAR(m.probability[0], 0.0002, 0.00005);
  EXPECT_LT(m.probability[1], 1e-10);
  EXPECT_EQ(m.probability[2], 1.0);
}

TEST(Estimation, Interpretation) {
  EXPECT_EQ(interpret(0.1), "Slight Agreement");
  EXPECT_EQ(interpret(0.2), "Slight Agreement");
  EXPECT_EQ(interpret(0.35), "Fair Agreement");
  EXPECT_EQ(interpret(0.5), "Moderate Agreement");
  EXPECT_EQ(interpret(0.7), "Substantial Agreement");
  EXPECT_EQ(interpret(0.894), "Near-Perfect Agreement");
}

TEST(Estimation, RejectsIncompatibleOptions) {
  FitOptions o;
  o.model.method = Method::ML;
  EXPECT_THROW(fit(fixtures::reliability(), o), FitError);
}
