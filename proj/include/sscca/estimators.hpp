#pragma once

#include <Eigen/Dense>

#include "sscca/baseline_estimators.hpp"
#include "sscca/cov_blocks.hpp"
#include "sscca/sign_estimator.hpp"

namespace sscca {

struct EstimatorOptions {
  SpatialMedianOptions median;
  KendallOptions kendall;
};

/// Common entry point: estimate the joint scatter of `data` with the chosen
/// estimator and partition it at split_col.
inline CovBlocks estimate(EstimatorKind kind, const Eigen::Ref<const Eigen::MatrixXd>& data, Eigen::Index split_col,
                          const EstimatorOptions& opts = {}) {
  switch (kind) {
    case EstimatorKind::SpatialSign: return scaled_sscm(data, split_col, opts.median);
    case EstimatorKind::SampleCov: return sample_cov(data, split_col);
    case EstimatorKind::KendallBridge: return kendall_tau_matrix(data, split_col, opts.kendall);
  }
  throw SpecError("unknown estimator");
}

}  // namespace sscca
