#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "sscca/errors.hpp"

namespace sscca {

/// The scatter estimator behind a CCA fit. The solver only ever sees the
/// resulting blocks, so the three methods differ in nothing else.
enum class EstimatorKind { SpatialSign, SampleCov, KendallBridge };

/// Method label used in tables: SSCCA, SCCA, KSCCA.
inline const char* method_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::SpatialSign: return "SSCCA";
    case EstimatorKind::SampleCov: return "SCCA";
    case EstimatorKind::KendallBridge: return "KSCCA";
  }
  return "?";
}

inline EstimatorKind parse_estimator_kind(const std::string& s) {
  if (s == "SSCCA" || s == "spatial-sign") return EstimatorKind::SpatialSign;
  if (s == "SCCA" || s == "sample-cov") return EstimatorKind::SampleCov;
  if (s == "KSCCA" || s == "kendall") return EstimatorKind::KendallBridge;
  throw SpecError("unknown method '" + s + "' (expected SSCCA, KSCCA or SCCA)");
}

struct CovBlocks {
  Eigen::MatrixXd s1;
  Eigen::MatrixXd s12;
  Eigen::MatrixXd s2;
  EstimatorKind estimator_tag = EstimatorKind::SampleCov;
  double scale_applied = 1.0;
  /// Non-fatal issues met while estimating (constant columns, slow medians).
  std::vector<std::string> warnings;

  Eigen::Index p1() const { return s1.rows(); }
  Eigen::Index p2() const { return s2.rows(); }

  static CovBlocks partition(const Eigen::MatrixXd& full, Eigen::Index split_col, EstimatorKind tag,
                             double scale) {
    if (full.rows() != full.cols()) throw SpecError("scatter matrix must be square");
    if (split_col <= 0 || split_col >= full.cols()) throw SpecError("split column out of range");
    const Eigen::Index p2 = full.cols() - split_col;
    CovBlocks out;
    out.s1 = full.topLeftCorner(split_col, split_col);
    out.s12 = full.topRightCorner(split_col, p2);
    out.s2 = full.bottomRightCorner(p2, p2);
    out.estimator_tag = tag;
    out.scale_applied = scale;
    return out;
  }

  Eigen::MatrixXd full() const {
    const Eigen::Index a = p1();
    const Eigen::Index b = p2();
    Eigen::MatrixXd out(a + b, a + b);
    out.topLeftCorner(a, a) = s1;
    out.topRightCorner(a, b) = s12;
    out.bottomLeftCorner(b, a) = s12.transpose();
    out.bottomRightCorner(b, b) = s2;
    return out;
  }
};

}  // namespace sscca
