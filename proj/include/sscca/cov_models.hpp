#pragma once

// Ground-truth joint covariance structures for the simulation study:
// block-diagonal AR(1) marginals and rank-one (Model I) or rank-one plus
// low-rank (Model II) cross-covariances with known canonical directions.

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "sscca/errors.hpp"

namespace sscca {

enum class ModelKind { I, II };

inline const char* to_string(ModelKind kind) { return kind == ModelKind::I ? "I" : "II"; }

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "I" || s == "1") return ModelKind::I;
  if (s == "II" || s == "2") return ModelKind::II;
  throw SpecError("unknown model '" + s + "' (expected I or II)");
}

struct BlockArCov {
  Eigen::Index d = 0;
  Eigen::Index block_count = 0;
  double rho = 0.0;
  Eigen::MatrixXd matrix;
};

/// d x d block-diagonal matrix, block_count equal blocks, entry rho^|i-j|
/// inside a block and zero across blocks.
inline BlockArCov build_block_ar_cov(Eigen::Index d, Eigen::Index block_count, double rho) {
  if (d <= 0 || block_count <= 0) throw SpecError("block AR covariance needs d > 0 and block_count > 0");
  if (d % block_count != 0) {
    throw SpecError("dimension " + std::to_string(d) + " is not divisible by block count " +
                    std::to_string(block_count));
  }
  if (!(rho > 0.0 && rho < 1.0)) throw SpecError("block AR correlation must lie in (0, 1)");

  const Eigen::Index size = d / block_count;
  BlockArCov out{d, block_count, rho, Eigen::MatrixXd::Zero(d, d)};
  for (Eigen::Index b = 0; b < block_count; ++b) {
    const Eigen::Index off = b * size;
    for (Eigen::Index i = 0; i < size; ++i) {
      for (Eigen::Index j = 0; j < size; ++j) {
        out.matrix(off + i, off + j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
      }
    }
  }
  return out;
}

/// Sparse loading vector with 1/sqrt(3) at 1-based positions 1, 6 and 11.
inline Eigen::VectorXd sparse_direction_v(Eigen::Index d) {
  if (d < 11) throw SpecError("sparse direction needs d >= 11, got " + std::to_string(d));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  const double value = 1.0 / std::sqrt(3.0);
  v(0) = value;
  v(5) = value;
  v(10) = value;
  return v;
}

/// Rescales v so that w' sigma w = 1.
inline Eigen::VectorXd normalize_direction(const Eigen::VectorXd& v, const Eigen::MatrixXd& sigma) {
  if (v.size() != sigma.rows() || sigma.rows() != sigma.cols()) {
    throw SpecError("normalize_direction: dimension mismatch");
  }
  if (v.isZero(0.0)) throw SpecError("normalize_direction: zero vector");
  const double q = v.dot(sigma * v);
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw NumericalError("normalize_direction: quadratic form is not positive");
  }
  return v / std::sqrt(q);
}

/// Cholesky-based positive-definiteness check.
inline bool is_positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

struct JointCovModel {
  Eigen::MatrixXd sigma1;
  Eigen::MatrixXd sigma2;
  Eigen::MatrixXd sigma12;
  Eigen::VectorXd w1_star;
  Eigen::VectorXd w2_star;
  double rho_star = 0.0;
  ModelKind model_kind = ModelKind::I;

  Eigen::Index p1() const { return sigma1.rows(); }
  Eigen::Index p2() const { return sigma2.rows(); }

  /// The assembled (p1+p2) x (p1+p2) matrix [[S1, S12], [S12', S2]].
  Eigen::MatrixXd joint() const {
    const Eigen::Index a = p1();
    const Eigen::Index b = p2();
    Eigen::MatrixXd out(a + b, a + b);
    out.topLeftCorner(a, a) = sigma1;
    out.topRightCorner(a, b) = sigma12;
    out.bottomLeftCorner(b, a) = sigma12.transpose();
    out.bottomRightCorner(b, b) = sigma2;
    return out;
  }
};

namespace detail {

inline void check_marginals(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2) {
  if (sigma1.rows() != sigma1.cols() || sigma2.rows() != sigma2.cols()) {
    throw SpecError("marginal covariances must be square");
  }
  if (!is_positive_definite(sigma1) || !is_positive_definite(sigma2)) {
    throw NumericalError("marginal covariance is not positive definite");
  }
}

inline void check_joint(const JointCovModel& model) {
  if (!is_positive_definite(model.joint())) {
    throw NumericalError("assembled joint covariance is not positive definite");
  }
}

}  // namespace detail

/// Model I with caller-supplied loading vectors v1, v2 (normalized internally).
inline JointCovModel build_model_I(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2,
                                   const Eigen::VectorXd& v1, const Eigen::VectorXd& v2, double phi1) {
  if (!(phi1 >= 0.0 && phi1 < 1.0)) throw SpecError("phi1 must lie in [0, 1)");
  detail::check_marginals(sigma1, sigma2);

  JointCovModel model;
  model.sigma1 = sigma1;
  model.sigma2 = sigma2;
  model.w1_star = normalize_direction(v1, sigma1);
  model.w2_star = normalize_direction(v2, sigma2);
  model.rho_star = phi1;
  model.model_kind = ModelKind::I;
  model.sigma12 = phi1 * (sigma1 * model.w1_star) * (sigma2 * model.w2_star).transpose();
  detail::check_joint(model);
  return model;
}

/// Model I: rank-one cross-covariance S1 w1* phi1 w2*' S2 with w_g* the
/// sparse loading vector normalized under S_g.
inline JointCovModel build_model_I(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2, double phi1) {
  return build_model_I(sigma1, sigma2, sparse_direction_v(sigma1.rows()), sparse_direction_v(sigma2.rows()), phi1);
}

struct OrthoComplementBasis {
  Eigen::MatrixXd columns;  // d x k, columns' * sigma * columns = I, sigma-orthogonal to w*
};

/// Draws a d x k standard Gaussian matrix, projects out w_star under the
/// sigma inner product and orthonormalizes the columns (two passes of
/// modified Gram-Schmidt). Retries with a fresh draw on breakdown.
template <class Generator>
OrthoComplementBasis build_ortho_complement_basis(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& w_star,
                                                  Eigen::Index k, Generator& rng) {
  const Eigen::Index d = sigma.rows();
  if (k <= 0 || d <= k + 1) throw SpecError("orthogonal complement basis needs d > k + 1");

  constexpr int kMaxAttempts = 6;  // first draw plus five retries
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Eigen::MatrixXd w(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) w(i, j) = normal(rng);
    }
    const Eigen::VectorXd sw_star = sigma * w_star;
    const double star_norm2 = w_star.dot(sw_star);

    Eigen::MatrixXd sw(d, k);  // sigma * w for finished columns
    bool breakdown = false;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double initial = std::sqrt(w.col(j).dot(sigma * w.col(j)));
      for (int pass = 0; pass < 2; ++pass) {
        w.col(j) -= (sw_star.dot(w.col(j)) / star_norm2) * w_star;
        for (Eigen::Index i = 0; i < j; ++i) w.col(j) -= sw.col(i).dot(w.col(j)) * w.col(i);
      }
      sw.col(j) = sigma * w.col(j);
      const double norm = std::sqrt(w.col(j).dot(sw.col(j)));
      if (!(norm > 1e-8 * initial)) {
        breakdown = true;
        break;
      }
      w.col(j) /= norm;
      sw.col(j) /= norm;
    }
    if (!breakdown) return OrthoComplementBasis{std::move(w)};
  }
  throw NumericalError("Gram-Schmidt breakdown after 5 retries");
}

struct ModelIIParams {
  Eigen::Index extra_rank = 50;
  double extra_scale = 0.1;
};

/// Model II: Model I plus S1 W1 Lambda W2' S2 with Lambda = extra_scale * I.
/// Returns the model; the bases are exposed through the optional out-params.
template <class Generator>
JointCovModel build_model_II(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2, double phi1,
                             const ModelIIParams& params, Generator& rng,
                             OrthoComplementBasis* basis1 = nullptr, OrthoComplementBasis* basis2 = nullptr) {
  if (params.extra_scale < 0.0 || params.extra_scale >= phi1) {
    throw SpecError("Model II extra_scale must lie in [0, phi1)");
  }
  JointCovModel model = build_model_I(sigma1, sigma2, phi1);
  model.model_kind = ModelKind::II;

  OrthoComplementBasis b1 = build_ortho_complement_basis(sigma1, model.w1_star, params.extra_rank, rng);
  OrthoComplementBasis b2 = build_ortho_complement_basis(sigma2, model.w2_star, params.extra_rank, rng);
  if (params.extra_scale > 0.0) {
    model.sigma12 += params.extra_scale * (sigma1 * b1.columns) * (sigma2 * b2.columns).transpose();
  }
  detail::check_joint(model);
  if (basis1) *basis1 = std::move(b1);
  if (basis2) *basis2 = std::move(b2);
  return model;
}

/// Marginals used throughout the simulation study: five AR(0.8) blocks.
inline Eigen::MatrixXd default_marginal(Eigen::Index d) { return build_block_ar_cov(d, 5, 0.8).matrix; }

}  // namespace sscca
