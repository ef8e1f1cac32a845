#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sscca/cov_models.hpp"
#include "sscca/errors.hpp"
#include "sscca/rng.hpp"

namespace sscca {

enum class DistributionKind { Normal, StudentT3Scaled, MixtureNormalScaled };

inline const char* to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::Normal: return "normal";
    case DistributionKind::StudentT3Scaled: return "t3";
    case DistributionKind::MixtureNormalScaled: return "mixture";
  }
  return "?";
}

inline DistributionKind parse_distribution_kind(const std::string& s) {
  if (s == "normal") return DistributionKind::Normal;
  if (s == "t3") return DistributionKind::StudentT3Scaled;
  if (s == "mixture") return DistributionKind::MixtureNormalScaled;
  throw SpecError("unknown distribution '" + s + "' (expected normal, t3 or mixture)");
}

/// Which component a mixture row is drawn from. Random is the real sampler;
/// the forced variants exist to test each branch in isolation.
enum class MixtureBranch { Random, ForceNarrow, ForceWide };

/// Two-component scale mixture: with probability wide_weight the row uses
/// covariance kappa^2 * Sigma, otherwise Sigma. Rows are divided by
/// sqrt((1 - w) + w * kappa^2) so the population covariance is Sigma.
struct MixtureParams {
  double kappa = 10.0;
  double wide_weight = 0.2;
  MixtureBranch branch = MixtureBranch::Random;

  double normalization() const { return std::sqrt((1.0 - wide_weight) + wide_weight * kappa * kappa); }
};

inline constexpr double kStudentDof = 3.0;

enum class DataSource { Simulated, File };

struct Dataset {
  Eigen::MatrixXd data;  // n x (p1 + p2)
  Eigen::Index split_col = 0;
  std::optional<std::uint64_t> seed;
  DataSource source = DataSource::Simulated;
  std::string path;
  std::vector<std::string> column_names;

  Eigen::Index n() const { return data.rows(); }
  Eigen::Index p() const { return data.cols(); }

  void validate() const {
    if (data.rows() < 2) throw DataError("dataset needs at least 2 rows");
    if (split_col <= 0 || split_col >= data.cols()) {
      throw SpecError("split column " + std::to_string(split_col) + " must lie strictly between 0 and " +
                      std::to_string(data.cols()));
    }
  }
};

/// Draws rows X = L z (LL' = joint covariance) followed by a per-row radial
/// factor. The factorization is computed once and reused across draws.
class EllipticalSampler {
 public:
  explicit EllipticalSampler(const JointCovModel& model) : split_col_(model.p1()) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.joint());
    if (llt.info() != Eigen::Success) throw NumericalError("joint covariance factorization failed");
    lower_t_ = llt.matrixL().transpose();
  }

  Eigen::Index dimension() const { return lower_t_.rows(); }

  Dataset sample(DistributionKind kind, Eigen::Index n, Rng& rng, const MixtureParams& mixture = {}) const {
    switch (kind) {
      case DistributionKind::Normal: return normal(n, rng);
      case DistributionKind::StudentT3Scaled: return t3_scaled(n, rng);
      case DistributionKind::MixtureNormalScaled: return mixture_scaled(n, rng, mixture);
    }
    throw SpecError("unknown distribution");
  }

  Dataset normal(Eigen::Index n, Rng& rng) const { return make_dataset(gaussian_rows(n, rng)); }

  /// Multivariate t with 3 degrees of freedom divided by sqrt(3): each
  /// Gaussian row is divided by sqrt(chi2_3).
  Dataset t3_scaled(Eigen::Index n, Rng& rng) const {
    Eigen::MatrixXd x = gaussian_rows(n, rng);
    std::chi_squared_distribution<double> chi2(kStudentDof);
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) /= std::sqrt(chi2(rng));
    return make_dataset(std::move(x));
  }

  Dataset mixture_scaled(Eigen::Index n, Rng& rng, const MixtureParams& params) const {
    if (!(params.wide_weight >= 0.0 && params.wide_weight <= 1.0) || !(params.kappa > 0.0)) {
      throw SpecError("mixture needs wide_weight in [0, 1] and kappa > 0");
    }
    Eigen::MatrixXd x = gaussian_rows(n, rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double scale = params.normalization();
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool wide_draw = unif(rng) < params.wide_weight;
      const bool wide = params.branch == MixtureBranch::Random ? wide_draw : params.branch == MixtureBranch::ForceWide;
      x.row(i) *= (wide ? params.kappa : 1.0) / scale;
    }
    return make_dataset(std::move(x));
  }

 private:
  Eigen::MatrixXd gaussian_rows(Eigen::Index n, Rng& rng) const {
    if (n < 2) throw SpecError("sample size must be at least 2");
    const Eigen::Index p = lower_t_.rows();
    Eigen::MatrixXd z(n, p);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) z(i, j) = normal(rng);
    }
    return z * lower_t_.triangularView<Eigen::Upper>();
  }

  Dataset make_dataset(Eigen::MatrixXd x) const {
    Dataset ds;
    ds.data = std::move(x);
    ds.split_col = split_col_;
    ds.source = DataSource::Simulated;
    return ds;
  }

  Eigen::MatrixXd lower_t_;
  Eigen::Index split_col_;
};

inline Dataset sample_normal(const JointCovModel& model, Eigen::Index n, Rng& rng) {
  return EllipticalSampler(model).normal(n, rng);
}

inline Dataset sample_t3_scaled(const JointCovModel& model, Eigen::Index n, Rng& rng) {
  return EllipticalSampler(model).t3_scaled(n, rng);
}

inline Dataset sample_mixture_scaled(const JointCovModel& model, Eigen::Index n, Rng& rng,
                                     const MixtureParams& params = {}) {
  return EllipticalSampler(model).mixture_scaled(n, rng, params);
}

}  // namespace sscca
