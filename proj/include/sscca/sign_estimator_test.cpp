#include "sscca/sign_estimator.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sscca/rng.hpp"

using namespace sscca;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Rng rng = make_stream(seed, {77});
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = z(rng);
  }
  return x;
}

bool monotone(const std::vector<double>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k] > trace[k - 1] * (1.0 + 1e-12)) return false;
  }
  return true;
}

}  // namespace

TEST(SpatialSign, UnitLengthAndZero) {
  Eigen::VectorXd x(2);
  x << 3.0, 4.0;
  EXPECT_NEAR(spatial_sign(x).norm(), 1.0, 1e-15);
  EXPECT_NEAR(spatial_sign(x)(0), 0.6, 1e-15);
  EXPECT_TRUE(spatial_sign(Eigen::VectorXd::Zero(3)).isZero(0.0));
}

TEST(SpatialMedian, EquilateralTriangleCentroid) {
  Eigen::MatrixXd x(3, 2);
  x << 0.0, 0.0, 2.0, 0.0, 1.0, std::sqrt(3.0);
  const auto r = spatial_median(x);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.mu_hat(0), 1.0, 1e-6);
  EXPECT_NEAR(r.mu_hat(1), std::sqrt(3.0) / 3.0, 1e-6);
}

TEST(SpatialMedian, MatchesGridSearch) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd x = gaussian(50, 2, seed);
    const auto r = spatial_median(x);
    const Eigen::Vector2d grid = oracle::grid_search_median(x);
    EXPECT_TRUE(r.converged);
    EXPECT_LT((r.mu_hat - grid).norm(), 2e-3) << seed;
    EXPECT_TRUE(monotone(r.objective_trace)) << seed;
  }
}

TEST(SpatialMedian, MedianAtRepeatedDataPoint) {
  // three copies of the origin outweigh the pull of the other three points
  Eigen::MatrixXd x(6, 2);
  x << 0, 0, 0, 0, 0, 0, 4, 1, 1, 4, 5, 5;
  const auto r = spatial_median(x);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.mu_hat.norm(), 1e-6);
  EXPECT_TRUE(monotone(r.objective_trace));
}

TEST(SpatialMedian, StartsOnMedianDataPoint) {
  // coordinate-wise median is the origin, which is also the spatial median
  Eigen::MatrixXd x(5, 2);
  x << 0, 0, 0, 0, 0, 0, 1, 0, 0, 1;
  const auto r = spatial_median(x);
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.coincident_iterations, 1);
  EXPECT_TRUE(r.mu_hat.isZero(0.0));
}

TEST(SpatialMedian, TranslationEquivariant) {
  const Eigen::MatrixXd x = gaussian(40, 5, 3);
  Eigen::RowVectorXd shift(5);
  shift << 10, -3, 0.5, 2, 7;
  const auto a = spatial_median(x);
  const auto b = spatial_median(x.rowwise() + shift);
  EXPECT_LT((b.mu_hat - a.mu_hat - shift.transpose()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SpatialMedian, AllRowsEqual) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 3);
  const auto r = spatial_median(x);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.mu_hat.isOnes(0.0));
}

TEST(SignCov, TraceAndZeroRows) {
  Eigen::MatrixXd x = gaussian(20, 4, 1);
  x.row(3).setZero();
  const auto s = spatial_sign_cov(x, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(s.zero_rows, 1);
  EXPECT_NEAR(s.matrix.trace(), 19.0 / 20.0, 1e-14);
  EXPECT_EQ(s.matrix, s.matrix.transpose());
}

TEST(SignCov, RadialInvariance) {
  const Eigen::MatrixXd x = gaussian(60, 8, 2);
  Rng rng = make_stream(2, {1});
  std::uniform_real_distribution<double> u(0.01, 100.0);
  Eigen::MatrixXd y = x;
  for (Eigen::Index i = 0; i < y.rows(); ++i) y.row(i) *= u(rng);
  const auto a = spatial_sign_cov(x, Eigen::VectorXd::Zero(8));
  const auto b = spatial_sign_cov(y, Eigen::VectorXd::Zero(8));
  EXPECT_LT((a.matrix - b.matrix).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SignCov, RotationEquivariance) {
  const Eigen::MatrixXd x = gaussian(80, 6, 4);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(6, 6, 5)).householderQ();
  const auto a = scaled_sscm(x, 3);
  const auto b = scaled_sscm(x * q.transpose(), 3);
  EXPECT_LT((b.full() - q * a.full() * q.transpose()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(ScaledSscm, ApproximatesIdentityUnderSphericalData) {
  const Eigen::MatrixXd x = gaussian(500, 40, 6);
  const auto b = scaled_sscm(x, 20);
  EXPECT_DOUBLE_EQ(b.scale_applied, 40.0);
  EXPECT_EQ(b.estimator_tag, EstimatorKind::SpatialSign);
  EXPECT_LT((b.full() - Eigen::MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff(), 0.35);
  EXPECT_NEAR(b.full().trace(), 40.0, 1e-10);
}

TEST(ScaledSscm, RejectsSingleRow) { EXPECT_THROW(scaled_sscm(Eigen::MatrixXd::Ones(1, 4), 2), SpecError); }
