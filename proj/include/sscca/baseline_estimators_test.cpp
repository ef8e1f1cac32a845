#include "sscca/baseline_estimators.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sscca/rng.hpp"
#include "sscca/sampling.hpp"

using namespace sscca;

TEST(SampleCov, TwoPointExample) {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 2, 2;
  const Eigen::MatrixXd s = sample_cov_matrix(x);
  EXPECT_DOUBLE_EQ(s(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(s(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(s(1, 1), 2.0);
  const auto b = sample_cov(x, 1);
  EXPECT_DOUBLE_EQ(b.s12(0, 0), 2.0);
  EXPECT_THROW(sample_cov_matrix(Eigen::MatrixXd::Ones(1, 3)), SpecError);
}

TEST(KendallTau, MatchesBruteForceWithoutTies) {
  Rng rng = make_stream(3, {1});
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 5 + 37 * rep;
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = z(rng);
      y(i) = 0.6 * x(i) + z(rng);
    }
    EXPECT_NEAR(*kendall_tau_b(x, y), *oracle::kendall_tau_b(x, y), 1e-13) << n;
  }
}

TEST(KendallTau, MatchesBruteForceWithTies) {
  Rng rng = make_stream(4, {1});
  std::uniform_int_distribution<int> small(0, 4);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index n = 3 + 11 * rep;
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = small(rng);
      y(i) = small(rng) + (rep % 2 ? x(i) : 0.0);
    }
    const auto fast = kendall_tau_b(x, y);
    const auto slow = oracle::kendall_tau_b(x, y);
    ASSERT_EQ(fast.has_value(), slow.has_value());
    if (fast) EXPECT_NEAR(*fast, *slow, 1e-13) << n;
  }
}

TEST(KendallTau, PerfectAndReversed) {
  Eigen::VectorXd x(6), y(6);
  x << 1, 2, 3, 4, 5, 6;
  y << 10, 20, 30, 40, 50, 60;
  EXPECT_DOUBLE_EQ(*kendall_tau_b(x, y), 1.0);
  EXPECT_DOUBLE_EQ(*kendall_tau_b(x, -y), -1.0);
  EXPECT_FALSE(kendall_tau_b(x, Eigen::VectorXd::Constant(6, 2.0)).has_value());
}

TEST(KendallBridge, RecoversGaussianCorrelation) {
  EXPECT_DOUBLE_EQ(kendall_bridge(0.0), 0.0);
  EXPECT_NEAR(kendall_bridge(1.0), 1.0, 1e-15);
  // tau = (2/pi) asin(rho) for Gaussian data
  const double rho = 0.8;
  EXPECT_NEAR(kendall_bridge(2.0 / std::numbers::pi * std::asin(rho)), rho, 1e-14);

  Eigen::MatrixXd s(2, 2);
  s << 1, rho, rho, 1;
  JointCovModel m;
  m.sigma1 = s.topLeftCorner(1, 1);
  m.sigma2 = s.bottomRightCorner(1, 1);
  m.sigma12 = s.topRightCorner(1, 1);
  Rng rng = make_stream(5, {1});
  const auto ds = sample_t3_scaled(m, 20000, rng);
  EXPECT_NEAR(kendall_correlation_matrix(ds.data)(0, 1), rho, 0.02);
}

TEST(KendallMatrix, InvariantUnderMonotoneTransforms) {
  Rng rng = make_stream(6, {1});
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(60, 5);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = z(rng) + (j > 0 ? 0.5 * x(i, j - 1) : 0.0);
  }
  Eigen::MatrixXd y = x;
  y.col(0) = x.col(0).array().exp();
  y.col(1) = x.col(1).array().cube();
  y.col(2) = 3.0 * x.col(2).array() + 7.0;
  y.col(3) = x.col(3).array().atan();
  const auto a = kendall_correlation_matrix(x);
  const auto b = kendall_correlation_matrix(y);
  EXPECT_EQ(a, b);
}

TEST(KendallMatrix, ConstantColumnWarnsAndZeroes) {
  Eigen::MatrixXd x(10, 3);
  for (int i = 0; i < 10; ++i) x.row(i) << i, 5.0, (i * 7) % 10;
  const auto blocks = kendall_tau_matrix(x, 1);
  ASSERT_EQ(blocks.warnings.size(), 1u);
  EXPECT_NE(blocks.warnings[0].find("column 2"), std::string::npos);
  const Eigen::MatrixXd full = blocks.full();
  EXPECT_EQ(full(0, 1), 0.0);
  EXPECT_EQ(full(1, 2), 0.0);
  EXPECT_EQ(full(1, 1), 1.0);
}

TEST(KendallMatrix, PsdProjectionKeepsUnitDiagonal) {
  Eigen::MatrixXd r(3, 3);
  r << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;  // indefinite
  const Eigen::MatrixXd p = project_to_psd_correlation(r, 1e-6);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  EXPECT_LT((p.diagonal() - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff(), 1e-15);
}
