#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "sscca/cov_blocks.hpp"
#include "sscca/cov_models.hpp"
#include "sscca/errors.hpp"

namespace sscca {

/// |w1' S12 w2| / sqrt(w1' S1 w1 * w2' S2 w2) under a reference scatter
/// (the truth in simulations, test-set blocks in real-data evaluation).
inline double oos_correlation(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2, const Eigen::MatrixXd& s1,
                              const Eigen::MatrixXd& s12, const Eigen::MatrixXd& s2) {
  if (w1.size() != s1.rows() || w2.size() != s2.rows() || s12.rows() != s1.rows() || s12.cols() != s2.rows()) {
    throw SpecError("oos_correlation: dimension mismatch");
  }
  const double q1 = w1.dot(s1 * w1);
  const double q2 = w2.dot(s2 * w2);
  if (!(q1 > 0.0) || !(q2 > 0.0)) throw UndefinedMetricError("oos_correlation: quadratic form is not positive");
  return std::abs(w1.dot(s12 * w2)) / (std::sqrt(q1) * std::sqrt(q2));
}

inline double oos_correlation(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2, const CovBlocks& blocks) {
  return oos_correlation(w1, w2, blocks.s1, blocks.s12, blocks.s2);
}

inline double oos_correlation(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2, const JointCovModel& truth) {
  return oos_correlation(w1, w2, truth.sigma1, truth.sigma12, truth.sigma2);
}

/// 1 - |w_hat' S w*| / sqrt(w_hat' S w_hat), with w*' S w* = 1.
inline double predictive_loss(const Eigen::VectorXd& w_star, const Eigen::VectorXd& w_hat, const Eigen::MatrixXd& sigma) {
  if (w_star.size() != w_hat.size() || sigma.rows() != w_hat.size()) throw SpecError("predictive_loss: dimension mismatch");
  const Eigen::VectorXd s_hat = sigma * w_hat;
  const double q = w_hat.dot(s_hat);
  if (w_hat.isZero(0.0) || !(q > 0.0)) throw UndefinedMetricError("predictive_loss: zero estimated direction");
  const double loss = 1.0 - std::abs(s_hat.dot(w_star)) / std::sqrt(q);
  return std::clamp(loss, 0.0, 1.0);
}

/// Selection rates. `fpr`/`fnr` follow the printed definitions used in the
/// result tables:
///     fpr = 1 - #{w_hat != 0, w* != 0} / #{w* != 0}   (share of the true support missed)
///     fnr = 1 - #{w_hat == 0, w* == 0} / #{w* == 0}   (share of true zeros selected)
/// which is the reverse of the usual naming. The conventional pair is kept
/// alongside: conventional_fpr == fnr and conventional_fnr == fpr.
struct SelectionRates {
  double fpr = 0.0;
  double fnr = 0.0;
  double conventional_fpr = 0.0;
  double conventional_fnr = 0.0;
};

inline SelectionRates selection_rates(const Eigen::VectorXd& w_star, const Eigen::VectorXd& w_hat) {
  if (w_star.size() != w_hat.size()) throw SpecError("selection_rates: dimension mismatch");
  Eigen::Index true_nonzero = 0, true_zero = 0, hit = 0, kept_zero = 0;
  for (Eigen::Index j = 0; j < w_star.size(); ++j) {
    if (w_star(j) != 0.0) {
      ++true_nonzero;
      if (w_hat(j) != 0.0) ++hit;
    } else {
      ++true_zero;
      if (w_hat(j) == 0.0) ++kept_zero;
    }
  }
  if (true_nonzero == 0 || true_zero == 0) {
    throw UndefinedMetricError("selection_rates: truth must have both zero and nonzero entries");
  }
  SelectionRates r;
  r.fpr = 1.0 - static_cast<double>(hit) / static_cast<double>(true_nonzero);
  r.fnr = 1.0 - static_cast<double>(kept_zero) / static_cast<double>(true_zero);
  r.conventional_fpr = r.fnr;
  r.conventional_fnr = r.fpr;
  return r;
}

/// (u'v)^2 / (|u|^2 |v|^2).
inline double cos2_angle(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw SpecError("cos2_angle: dimension mismatch");
  const double uu = u.squaredNorm();
  const double vv = v.squaredNorm();
  if (!(uu > 0.0) || !(vv > 0.0)) throw UndefinedMetricError("cos2_angle: zero vector");
  const double uv = u.dot(v);
  return std::clamp(uv * uv / (uu * vv), 0.0, 1.0);
}

struct EvalReport {
  double rho_hat = 0.0;
  double abs_rho_gap = 0.0;
  double loss1 = 0.0;
  double loss2 = 0.0;
  double fpr1 = 0.0, fnr1 = 0.0, fpr2 = 0.0, fnr2 = 0.0;
  double cos2_angle1 = 0.0;
  double cos2_angle2 = 0.0;
};

/// All simulation metrics of a fitted direction pair against the truth.
inline EvalReport evaluate_against_truth(const Eigen::VectorXd& w1_hat, const Eigen::VectorXd& w2_hat,
                                         const JointCovModel& truth) {
  EvalReport r;
  r.rho_hat = oos_correlation(w1_hat, w2_hat, truth);
  r.abs_rho_gap = std::abs(r.rho_hat - truth.rho_star);
  r.loss1 = predictive_loss(truth.w1_star, w1_hat, truth.sigma1);
  r.loss2 = predictive_loss(truth.w2_star, w2_hat, truth.sigma2);
  const SelectionRates s1 = selection_rates(truth.w1_star, w1_hat);
  const SelectionRates s2 = selection_rates(truth.w2_star, w2_hat);
  r.fpr1 = s1.fpr;
  r.fnr1 = s1.fnr;
  r.fpr2 = s2.fpr;
  r.fnr2 = s2.fnr;
  r.cos2_angle1 = cos2_angle(w1_hat, truth.w1_star);
  r.cos2_angle2 = cos2_angle(w2_hat, truth.w2_star);
  return r;
}

}  // namespace sscca
