#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wavedeform/covariance_model.hpp"
#include "wavedeform/error.hpp"

using namespace wavedeform;

namespace {

Eigen::MatrixX2d random_points(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0, scale);
  Eigen::MatrixX2d p(n, 2);
  for (int i = 0; i < n; ++i) p.row(i) << u(rng), u(rng);
  return p;
}

}  // namespace

TEST(CovarianceModel, CorrelationExamples) {
  EXPECT_EQ(correlation(0.7, 0.0), 1.0);
  EXPECT_NEAR(correlation(0.25, 0.25), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(correlation(0.25, 0.5), std::exp(-2.0), 1e-16);
  EXPECT_THROW(correlation(0.25, -1e-3), DomainError);
  EXPECT_THROW(correlation(0.0, 1.0), DomainError);
  EXPECT_THROW(correlation(-1.0, 1.0), DomainError);
}

TEST(CovarianceModel, ParamsValidation) {
  EXPECT_NO_THROW((CovarianceParams{1, 0.25, 0}.validate()));
  EXPECT_THROW((CovarianceParams{0, 0.25, 0.05}.validate()), DomainError);
  EXPECT_THROW((CovarianceParams{1, 0, 0.05}.validate()), DomainError);
  EXPECT_THROW((CovarianceParams{1, 0.25, -0.01}.validate()), DomainError);
  EXPECT_THROW((CovarianceParams{1, std::nan(""), 0.05}.validate()), DomainError);
}

TEST(CovarianceModel, DeformedCoordinatesValidation) {
  EXPECT_THROW(DeformedCoordinates(Eigen::MatrixX2d(1, 2)), DomainError);
  Eigen::MatrixX2d bad(2, 2);
  bad << 0, 0, std::nan(""), 1;
  EXPECT_THROW(DeformedCoordinates{bad}, DomainError);
}

TEST(CovarianceModel, CoincidentPointsWarnButStayValid) {
  Eigen::MatrixX2d p(2, 2);
  p << 0.3, 0.4, 0.3, 0.4;
  CovarianceDiagnostics diag;
  const Eigen::MatrixXd s = build_covariance(DeformedCoordinates(p), {1.0, 0.25, 0.05}, &diag);
  Eigen::Matrix2d expected;
  expected << 1.05, 1.0, 1.0, 1.05;
  EXPECT_TRUE(s.isApprox(expected, 1e-15));
  ASSERT_EQ(diag.warnings.size(), 1u);
  EXPECT_NE(diag.warnings[0].find("DuplicatePointWarning"), std::string::npos);
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(s).info(), Eigen::Success);
}

TEST(CovarianceModel, TwoPointExample) {
  Eigen::MatrixX2d p(2, 2);
  p << 0.1, 0.2, 0.1 + 0.15, 0.2 + 0.2;  // distance 0.25
  const Eigen::MatrixXd s = build_covariance(DeformedCoordinates(p), {1.0, 0.25, 0.05});
  EXPECT_NEAR(s(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_EQ(s(0, 0), 1.05);
  EXPECT_EQ(s(1, 1), 1.05);
}

TEST(CovarianceModel, ZeroNuggetDiagonalIsNu) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd s = build_covariance(DeformedCoordinates(random_points(rng, 6)), {2.5, 0.3, 0.0});
  for (Eigen::Index i = 0; i < s.rows(); ++i) EXPECT_EQ(s(i, i), 2.5);
}

TEST(CovarianceModel, DistanceMatrix) {
  Eigen::MatrixX2d p(2, 2);
  p << 0, 0, 3, 4;
  const Eigen::MatrixXd d = distance_matrix(p);
  EXPECT_EQ(d(0, 1), 5.0);
  EXPECT_EQ(d(1, 0), 5.0);
  EXPECT_EQ(d(0, 0), 0.0);

  Eigen::MatrixX2d same(3, 2);
  same << 0.5, 0.5, 0.5, 0.5, 0.5, 0.5;
  EXPECT_TRUE(distance_matrix(same).isZero(0.0));

  std::mt19937_64 rng(2);
  const Eigen::MatrixX2d r = random_points(rng, 5);
  const Eigen::MatrixXd dr = distance_matrix(r);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double dx = r(i, 0) - r(j, 0), dy = r(i, 1) - r(j, 1);
      EXPECT_EQ(dr(i, j), std::sqrt(dx * dx + dy * dy));
      for (int k = 0; k < 5; ++k) EXPECT_LE(dr(i, j), dr(i, k) + dr(k, j) + 1e-15);
    }
}

TEST(CovarianceModelProperty, ExactSymmetryAndCholesky) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lu(std::log(0.01), std::log(10.0));
  std::uniform_real_distribution<double> nug(1e-6, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial * 3;
    const Eigen::MatrixX2d p = random_points(rng, n, 1.0 + trial % 3);
    const CovarianceParams params{std::exp(lu(rng)), std::exp(lu(rng)), nug(rng)};
    const Eigen::MatrixXd s = build_covariance(DeformedCoordinates(p), params);
    EXPECT_TRUE((s.array() == s.transpose().array()).all());
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(s).info(), Eigen::Success) << trial;
  }
}

TEST(CovarianceModelProperty, OffDiagonalNonDecreasingInTheta) {
  std::mt19937_64 rng(4);
  const DeformedCoordinates c(random_points(rng, 12));
  Eigen::MatrixXd prev = build_covariance(c, {1.0, 0.01, 0.1});
  for (double theta = 0.02; theta < 5.0; theta *= 1.3) {
    const Eigen::MatrixXd cur = build_covariance(c, {1.0, theta, 0.1});
    for (Eigen::Index i = 0; i < cur.rows(); ++i)
      for (Eigen::Index j = 0; j < cur.cols(); ++j)
        if (i != j) EXPECT_GE(cur(i, j), prev(i, j));
    prev = cur;
  }
}
