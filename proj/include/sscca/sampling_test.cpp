#include "sscca/sampling.hpp"

#include <gtest/gtest.h>

#include "sscca/baseline_estimators.hpp"
#include "sscca/rng.hpp"

using namespace sscca;

namespace {

JointCovModel small_model() {
  const auto s = build_block_ar_cov(15, 5, 0.5).matrix;
  return build_model_I(s, s, 0.9);
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Sampling, NormalCovarianceMatchesModel) {
  const auto m = small_model();
  Rng rng = make_stream(1, {1});
  const auto ds = sample_normal(m, 100000, rng);
  EXPECT_EQ(ds.split_col, 15);
  EXPECT_EQ(ds.p(), 30);
  EXPECT_LT(max_abs_diff(sample_cov_matrix(ds.data), m.joint()), 0.05);
}

TEST(Sampling, ScaledT3CovarianceMatchesModel) {
  const auto m = small_model();
  Rng rng = make_stream(2, {1});
  const auto ds = sample_t3_scaled(m, 100000, rng);
  // heavy tails: the fourth moment is infinite, so the tolerance is looser
  EXPECT_LT(max_abs_diff(sample_cov_matrix(ds.data), m.joint()), 0.1);
}

TEST(Sampling, MixtureCovarianceMatchesModel) {
  const auto m = small_model();
  Rng rng = make_stream(3, {1});
  const auto ds = sample_mixture_scaled(m, 100000, rng);
  EXPECT_LT(max_abs_diff(sample_cov_matrix(ds.data), m.joint()), 0.1);
}

TEST(Sampling, SameSeedSameData) {
  const auto m = small_model();
  for (auto kind : {DistributionKind::Normal, DistributionKind::StudentT3Scaled, DistributionKind::MixtureNormalScaled}) {
    Rng a = make_stream(9, {4, 5});
    Rng b = make_stream(9, {4, 5});
    EllipticalSampler s(m);
    EXPECT_EQ(s.sample(kind, 50, a).data, s.sample(kind, 50, b).data) << to_string(kind);
  }
  Rng a = make_stream(9, {4, 5});
  Rng b = make_stream(9, {4, 6});
  EXPECT_NE(sample_normal(m, 20, a).data, sample_normal(m, 20, b).data);
}

TEST(Sampling, HeavyTailsHaveExcessKurtosis) {
  const auto m = small_model();
  Rng rng = make_stream(4, {1});
  const auto ds = sample_t3_scaled(m, 20000, rng);
  const Eigen::VectorXd x = ds.data.col(0).array() - ds.data.col(0).mean();
  const double m2 = x.array().square().mean();
  const double m4 = x.array().square().square().mean();
  EXPECT_GT(m4 / (m2 * m2), 3.0);
}

TEST(Sampling, ForcedNarrowBranchIsScaledNormal) {
  const auto m = small_model();
  MixtureParams narrow;
  narrow.branch = MixtureBranch::ForceNarrow;
  EXPECT_NEAR(narrow.normalization(), 4.5607017003965522, 1e-12);  // sqrt(20.8)

  // the mixture path draws the same Gaussians first, then n uniforms
  Rng a = make_stream(7, {1});
  Rng b = make_stream(7, {1});
  EllipticalSampler s(m);
  const auto mix = s.mixture_scaled(40, a, narrow);
  const auto normal = s.normal(40, b);
  EXPECT_LT(max_abs_diff(mix.data, normal.data / std::sqrt(20.8)), 1e-14);

  MixtureParams wide = narrow;
  wide.branch = MixtureBranch::ForceWide;
  Rng c = make_stream(7, {1});
  EXPECT_LT(max_abs_diff(s.mixture_scaled(40, c, wide).data, normal.data * 10.0 / std::sqrt(20.8)), 1e-13);
}

TEST(Sampling, ParseNames) {
  EXPECT_EQ(parse_distribution_kind("t3"), DistributionKind::StudentT3Scaled);
  EXPECT_EQ(parse_distribution_kind("mixture"), DistributionKind::MixtureNormalScaled);
  EXPECT_THROW(parse_distribution_kind("cauchy"), SpecError);
}

TEST(Sampling, RejectsTinySamples) {
  const auto m = small_model();
  Rng rng(1);
  EXPECT_THROW(sample_normal(m, 1, rng), SpecError);
}
