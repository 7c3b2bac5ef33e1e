#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wavedeform/error.hpp"
#include "wavedeform/gp_simulator.hpp"

using namespace wavedeform;

namespace {

// Re-implementations of the generators used as brute-force oracles.
Eigen::Vector2d oracle(ScenarioKind kind, double x1, double x2) {
  const double a = x1 - 0.5, b = x2 - 0.5;
  switch (kind) {
    case ScenarioKind::Linear:
      return {0.75 * x1 + 1.0 * x2, 1.0 * x1 + 0.25 * x2};
    case ScenarioKind::Quadratic:
      return {0.6 + b - 0.5 * a * a, 0.6 + a - 0.5 * b * b};
    case ScenarioKind::NonLinear: {
      const double r2 = a * a + b * b;
      const double t = 2.5 * std::exp(-r2) + 3.0 * std::numbers::pi / 2.0;
      return {0.5 + a * std::cos(t) + b * std::sin(t), 0.5 - a * std::sin(t) + b * std::cos(t)};
    }
    default:
      return {0, 0};
  }
}

}  // namespace

TEST(GpSimulator, GeneratorSpotChecks) {
  EXPECT_EQ(true_deformation(ScenarioKind::Linear, Eigen::Vector2d(1, 1)), Eigen::Vector2d(1.75, 1.25));
  EXPECT_EQ(true_deformation(ScenarioKind::Quadratic, Eigen::Vector2d(0.5, 0.5)), Eigen::Vector2d(0.6, 0.6));
  EXPECT_EQ(true_deformation(ScenarioKind::NonLinear, Eigen::Vector2d(0.5, 0.5)), Eigen::Vector2d(0.5, 0.5));
}

TEST(GpSimulatorProperty, GeneratorsMatchOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto kind : {ScenarioKind::Linear, ScenarioKind::Quadratic, ScenarioKind::NonLinear})
    for (int i = 0; i < 200; ++i) {
      const double x1 = u(rng), x2 = u(rng);
      const Eigen::Vector2d y = true_deformation(kind, Eigen::Vector2d(x1, x2));
      EXPECT_LT((y - oracle(kind, x1, x2)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(GpSimulator, WaveletScenarioCoefficients) {
  const auto& c = wavelet_scenario_coefficients();
  ASSERT_EQ(c.size(), 12u);
  EXPECT_EQ(c[0], 0.25);
  EXPECT_EQ(c[5], -1.2);
  EXPECT_EQ(c[8], -1.0);
  EXPECT_EQ(c[11], 0.19);
  const Eigen::Vector2d x(0.3, 0.6);
  EXPECT_EQ(true_deformation(ScenarioKind::Wavelet, x), wavelet_scenario_deformation()(x));
}

TEST(GpSimulator, Locations) {
  const Eigen::MatrixX2d a = generate_locations(50, 7), b = generate_locations(50, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, generate_locations(50, 8));
  EXPECT_TRUE((a.array() > 0.0).all() && (a.array() < 1.0).all());
  EXPECT_THROW(generate_locations(1, 1), DomainError);

  const int n = 10000;
  const Eigen::MatrixX2d big = generate_locations(n, 3);
  const double tol = 3.0 / std::sqrt(12.0 * n);
  EXPECT_NEAR(big.col(0).mean(), 0.5, tol);
  EXPECT_NEAR(big.col(1).mean(), 0.5, tol);
}

TEST(GpSimulator, SamplerShapesAndSeeds) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_EQ(sample_gp(I, 1, 1).cols(), 1);
  EXPECT_EQ(sample_gp(I, 1, 1).rows(), 3);
  EXPECT_EQ(sample_gp(I, 20, 5), sample_gp(I, 20, 5));
  EXPECT_NE(sample_gp(I, 20, 5), sample_gp(I, 20, 6));
  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  EXPECT_THROW(sample_gp(bad, 5, 1), NotPositiveDefinite);
  EXPECT_THROW(sample_gp(I, 0, 1), DomainError);
}

TEST(GpSimulator, SamplerIdentityCovariance) {
  const int T = 100000;
  const Eigen::MatrixXd z = sample_gp(Eigen::MatrixXd::Identity(3, 3), T, 11);
  const Eigen::MatrixXd cov = z * z.transpose() / static_cast<double>(T);
  EXPECT_LT((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(GpSimulator, ScenarioRunShapes) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::Quadratic;
  spec.n = 12;
  spec.T = 64;
  const ScenarioRun run = simulate_scenario(spec);
  EXPECT_EQ(run.locations.rows(), 12);
  EXPECT_EQ(run.true_deformed.rows(), 12);
  EXPECT_EQ(run.observations.rows(), 12);
  EXPECT_EQ(run.observations.cols(), 64);
  for (Eigen::Index i = 0; i < 12; ++i) {
    EXPECT_EQ(run.empirical_corr(i, i), 1.0);
    EXPECT_EQ(run.true_corr(i, i), 1.0);
  }
  EXPECT_TRUE((run.empirical_corr.array().abs() <= 1.0).all());
  EXPECT_TRUE((run.empirical_corr.array() == run.empirical_corr.transpose().array()).all());
  EXPECT_NEAR(run.true_corr(0, 1),
              std::exp(-(run.true_deformed.row(0) - run.true_deformed.row(1)).norm() / 0.25) / 1.05,
              1e-15);

  spec.T = 0;
  EXPECT_THROW(simulate_scenario(spec), DomainError);
}

TEST(GpSimulator, ScenarioNames) {
  for (auto k : {ScenarioKind::Linear, ScenarioKind::Quadratic, ScenarioKind::NonLinear, ScenarioKind::Wavelet})
    EXPECT_EQ(parse_scenario(to_string(k)), k);
  EXPECT_EQ(parse_scenario("NonLinear"), ScenarioKind::NonLinear);
  EXPECT_THROW(parse_scenario("cubic"), DomainError);
}

TEST(GpSimulator, RegularGrid) {
  const Eigen::MatrixX2d g = regular_grid(3);
  ASSERT_EQ(g.rows(), 9);
  EXPECT_EQ(g.row(0), Eigen::RowVector2d(0, 0));
  EXPECT_EQ(g.row(1), Eigen::RowVector2d(0.5, 0));
  EXPECT_EQ(g.row(8), Eigen::RowVector2d(1, 1));
  EXPECT_THROW(regular_grid(1), DomainError);
}

TEST(GpSimulator, RunScenarioRows) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::Linear;
  spec.n = 15;
  spec.T = 200;
  FitConfig mh, sh;
  mh.J = 1;
  mh.outer_max_iters = 5;
  sh = mh;
  sh.family = WaveletFamily::Shannon;
  const auto rows = run_scenario(spec, {mh, sh});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].scenario, "linear");
  EXPECT_EQ(rows[1].family, WaveletFamily::Shannon);
  EXPECT_EQ(rows[0].mse, rows[0].fit.mse);
  EXPECT_GE(rows[0].mse_true, 0.0);
  const auto again = run_scenario(spec, {mh});
  EXPECT_EQ(again[0].fit.coefficients, rows[0].fit.coefficients);
}
