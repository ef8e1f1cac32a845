#pragma once

// Penalized CCA by alternating l1-penalized quadratic minimization.
//
// With the other side's direction fixed, each side solves
//     min_w  w'Aw - 2 b'w + lambda |w|_1,     b = A12 w_other,
// by cyclic coordinate descent along a decreasing lambda path, picks lambda
// with BIC, and rescales the solution to w'Aw = 1. The rescaled solution is
// the maximizer of b'w - (lambda/2)|w|_1 subject to w'Aw <= 1 whenever the
// constraint is active, so the scheme is block-coordinate ascent on the
// penalized CCA objective.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sscca/cov_blocks.hpp"
#include "sscca/errors.hpp"

namespace sscca {

enum class BicCriterion { BIC1, BIC2 };

inline const char* to_string(BicCriterion c) { return c == BicCriterion::BIC1 ? "BIC1" : "BIC2"; }

inline BicCriterion parse_bic_criterion(const std::string& s) {
  if (s == "BIC1" || s == "bic1") return BicCriterion::BIC1;
  if (s == "BIC2" || s == "bic2") return BicCriterion::BIC2;
  throw SpecError("unknown criterion '" + s + "' (expected BIC1 or BIC2)");
}

/// min_w  w'aw - 2b'w + lambda |w|_1 (+ constant, used only for BIC).
struct LassoSubproblem {
  Eigen::Ref<const Eigen::MatrixXd> a;
  Eigen::Ref<const Eigen::VectorXd> b;
  double lambda = 0.0;
  double constant = 0.0;

  /// Smooth part plus constant: the residual sum of squares f.
  double residual(const Eigen::VectorXd& w) const { return w.dot(a * w) - 2.0 * b.dot(w) + constant; }

  double objective(const Eigen::VectorXd& w) const { return residual(w) - constant + lambda * w.lpNorm<1>(); }
};

struct LassoOptions {
  double tol = 1e-7;
  /// Also required at exit: largest KKT violation, from the running gradient.
  double kkt_tol = 1e-8;
  int max_sweeps = 10000;
};

struct LassoSolution {
  Eigen::VectorXd w;
  int sweeps = 0;
  bool converged = false;
  /// The iterates ran away: with an indefinite `a` the penalized objective can
  /// be unbounded below at small lambda.
  bool diverged = false;
};

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// Largest KKT violation of a candidate solution: for w_j = 0 the amount by
/// which |2(aw - b)_j| exceeds lambda, otherwise |2(aw - b)_j + lambda sign(w_j)|.
inline double kkt_violation(const LassoSubproblem& sub, const Eigen::VectorXd& w) {
  const Eigen::VectorXd grad = 2.0 * (sub.a * w - sub.b);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double v = w(j) == 0.0 ? std::max(0.0, std::abs(grad(j)) - sub.lambda)
                                 : std::abs(grad(j) + sub.lambda * (w(j) > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

/// Cyclic coordinate descent with the update
///     w_j <- S(b_j - sum_{k != j} a_jk w_k, lambda/2) / a_jj.
/// The gradient a w - b is kept up to date incrementally.
inline LassoSolution solve_lasso_qp(const LassoSubproblem& sub, const Eigen::VectorXd& w_init,
                                    const LassoOptions& opts = {}) {
  const Eigen::Index p = sub.a.rows();
  if (sub.a.cols() != p || sub.b.size() != p || w_init.size() != p) throw SpecError("lasso: dimension mismatch");
  if (sub.lambda < 0.0) throw SpecError("lasso: lambda must be non-negative");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(sub.a(j, j) > 0.0)) throw NumericalError("lasso: non-positive diagonal entry");
  }

  LassoSolution out;
  out.w = w_init;
  Eigen::VectorXd grad = sub.a * out.w - sub.b;  // half the gradient of the smooth part
  const double half_lambda = 0.5 * sub.lambda;
  const double runaway = 1e6 * std::max(sub.b.lpNorm<Eigen::Infinity>(), 1e-300) / sub.a.diagonal().minCoeff() +
                         1e6 * out.w.lpNorm<Eigen::Infinity>();

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double ajj = sub.a(j, j);
      const double old = out.w(j);
      const double z = ajj * old - grad(j);
      const double next = soft_threshold(z, half_lambda) / ajj;
      const double delta = next - old;
      if (delta != 0.0) {
        if (!(std::abs(next) <= runaway)) {
          out.diverged = true;
          out.sweeps = sweep + 1;
          return out;
        }
        out.w(j) = next;
        grad.noalias() += delta * sub.a.col(j);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    out.sweeps = sweep + 1;
    if (max_change < opts.tol) {
      double worst = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double g = 2.0 * grad(j);
        const double w = out.w(j);
        worst = std::max(worst, w == 0.0 ? std::abs(g) - sub.lambda
                                         : std::abs(g + sub.lambda * (w > 0.0 ? 1.0 : -1.0)));
      }
      if (worst <= opts.kkt_tol) {
        out.converged = true;
        break;
      }
    }
  }
  return out;
}

/// Geometric grid from lambda_max = 2 max|b_j| (the smallest lambda with a
/// zero solution) down to lambda_max * ratio.
inline std::vector<double> lambda_sequence(const Eigen::Ref<const Eigen::VectorXd>& b, int count, double ratio) {
  if (count < 2) throw SpecError("lambda sequence needs at least 2 values");
  if (!(ratio > 0.0 && ratio < 1.0)) throw SpecError("lambda ratio must lie in (0, 1)");
  const double lambda_max = 2.0 * b.lpNorm<Eigen::Infinity>();
  if (!(lambda_max > 0.0)) throw NumericalError("lambda sequence: cross term is zero (other direction vanished)");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] = lambda_max * std::pow(ratio, static_cast<double>(k) / (count - 1));
  }
  out.front() = lambda_max;
  return out;
}

inline Eigen::Index support_size(const Eigen::VectorXd& w) { return (w.array() != 0.0).count(); }

/// BIC1 = f + df log(n)/n;  BIC2 = log(n/(n - df) f) + df log(n)/n.
/// BIC2 is +inf when df >= n or f <= 0.
inline double bic_value(BicCriterion criterion, double f, Eigen::Index df, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  const double penalty = static_cast<double>(df) * std::log(nn) / nn;
  if (criterion == BicCriterion::BIC1) return f + penalty;
  if (df >= n || !(f > 0.0)) return std::numeric_limits<double>::infinity();
  return std::log(nn / (nn - static_cast<double>(df)) * f) + penalty;
}

struct BicPath {
  std::vector<double> lambdas;
  std::vector<double> criterion;  // NaN-free; +inf where undefined
  std::vector<Eigen::Index> df;
  std::vector<bool> lasso_converged;
  /// Index of the first lambda whose lasso diverged; the path stops there.
  std::optional<std::size_t> diverged_at;
  std::optional<std::size_t> selected;  // index of the chosen lambda, none if every fit is zero
  Eigen::VectorXd w;                    // selected solution (unnormalized)

  double selected_lambda() const { return selected ? lambdas[*selected] : std::numeric_limits<double>::quiet_NaN(); }
};

/// Fits the lasso along `lambdas` (in the given order, each fit warm-started
/// from the previous one) and picks the minimizer of the criterion among
/// nonzero solutions. Ties go to the larger lambda. A diverging fit ends the
/// path; it and all later lambdas get an infinite criterion.
inline BicPath bic_select(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                          double constant, const std::vector<double>& lambdas, BicCriterion criterion,
                          Eigen::Index n, const LassoOptions& opts = {}) {
  if (lambdas.empty()) throw SpecError("bic_select: empty lambda list");
  if (n < 2) throw SpecError("bic_select: sample size must be at least 2");

  BicPath path;
  path.lambdas = lambdas;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(a.rows());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    LassoSubproblem sub{a, b, lambdas[k], constant};
    LassoSolution sol = solve_lasso_qp(sub, w, opts);
    if (sol.diverged) {
      // unbounded here means unbounded for every smaller lambda too
      path.diverged_at = k;
      for (std::size_t rest = k; rest < lambdas.size(); ++rest) {
        path.criterion.push_back(std::numeric_limits<double>::infinity());
        path.df.push_back(0);
        path.lasso_converged.push_back(false);
      }
      break;
    }
    w = std::move(sol.w);
    const Eigen::Index df = support_size(w);
    const double value = bic_value(criterion, sub.residual(w), df, n);
    path.criterion.push_back(value);
    path.df.push_back(df);
    path.lasso_converged.push_back(sol.converged);
    if (df > 0 && (!path.selected || value < best)) {
      best = value;
      path.selected = k;
      path.w = w;
    }
  }
  return path;
}

struct SccaOptions {
  int n_lambda = 20;
  double lambda_ratio = 0.01;
  LassoOptions lasso{};
  double outer_tol = 1e-5;
  int max_outer = 100;
  double ridge = 1e-8;  // relative to the largest diagonal entry
  /// Fixed penalties bypass BIC selection on that side.
  std::optional<double> fixed_lambda1;
  std::optional<double> fixed_lambda2;
};

struct CcaFit {
  Eigen::VectorXd w1_hat;
  Eigen::VectorXd w2_hat;
  double rho_in_sample = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  BicPath bic_trace1;  // paths from the last outer iteration
  BicPath bic_trace2;
  std::vector<double> rho_trace;
  int outer_iterations = 0;
  bool converged = false;
  int lasso_nonconverged = 0;
  int truncated_paths = 0;  // lambda paths cut short by a diverging lasso
  std::vector<std::string> warnings;

  Eigen::Index support1() const { return support_size(w1_hat); }
  Eigen::Index support2() const { return support_size(w2_hat); }
};

/// A + ridge * max_diag * I, plus a Gershgorin-based lift when some diagonal
/// entry is not positive.
inline Eigen::MatrixXd ridge_lift(const Eigen::MatrixXd& a, double ridge, std::vector<std::string>* warnings) {
  Eigen::MatrixXd out = 0.5 * (a + a.transpose());
  const double max_diag = out.diagonal().maxCoeff();
  out.diagonal().array() += ridge * std::max(max_diag, 0.0);
  if (out.diagonal().minCoeff() <= 0.0) {
    double lower = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double radius = out.row(i).cwiseAbs().sum() - std::abs(out(i, i));
      lower = std::min(lower, out(i, i) - radius);
    }
    const double lift = std::abs(lower) + 1e-6;
    out.diagonal().array() += lift;
    if (warnings) warnings->push_back("scatter block had a non-positive diagonal; lifted by " + std::to_string(lift));
  }
  return out;
}

namespace detail {

inline Eigen::VectorXd normalize_or_throw(const Eigen::VectorXd& w, const Eigen::MatrixXd& a, int side) {
  const double q = w.dot(a * w);
  if (w.isZero(0.0) || !(q > 0.0)) throw DegenerateFitError(side, "direction is zero or has a non-positive norm");
  return w / std::sqrt(q);
}

}  // namespace detail

/// Alternating penalized CCA on estimated scatter blocks.
inline CcaFit fit_scca(const CovBlocks& blocks, Eigen::Index n, BicCriterion criterion, const SccaOptions& opts = {}) {
  const Eigen::Index p1 = blocks.p1();
  const Eigen::Index p2 = blocks.p2();
  if (p1 < 1 || p2 < 1 || blocks.s12.rows() != p1 || blocks.s12.cols() != p2) {
    throw SpecError("fit_scca: inconsistent block shapes");
  }
  if (n < 2) throw SpecError("fit_scca: sample size must be at least 2");

  CcaFit fit;
  const Eigen::MatrixXd a1 = ridge_lift(blocks.s1, opts.ridge, &fit.warnings);
  const Eigen::MatrixXd a2 = ridge_lift(blocks.s2, opts.ridge, &fit.warnings);
  const Eigen::MatrixXd& a12 = blocks.s12;
  if (a12.isZero(0.0)) throw DegenerateFitError(2, "cross-covariance block is zero");

  // leading right singular vector of A12
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a12.transpose() * a12);
  Eigen::VectorXd w2 = detail::normalize_or_throw(es.eigenvectors().col(p2 - 1), a2, 2);
  Eigen::VectorXd w1 = Eigen::VectorXd::Zero(p1);

  auto update_side = [&](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double constant,
                         const std::optional<double>& fixed, int side, double& lambda_out, BicPath& trace) {
    std::vector<double> lambdas;
    if (fixed) {
      lambdas = {*fixed};
    } else {
      if (b.isZero(0.0)) throw DegenerateFitError(side, "cross term vanished");
      lambdas = lambda_sequence(b, opts.n_lambda, opts.lambda_ratio);
    }
    trace = bic_select(a, b, constant, lambdas, criterion, n, opts.lasso);
    const std::size_t valid = trace.diverged_at.value_or(trace.lasso_converged.size());
    for (std::size_t k = 0; k < valid; ++k) fit.lasso_nonconverged += trace.lasso_converged[k] ? 0 : 1;
    if (trace.diverged_at) ++fit.truncated_paths;
    if (!trace.selected) throw DegenerateFitError(side, "every lambda yields the zero solution");
    lambda_out = trace.selected_lambda();
    return detail::normalize_or_throw(trace.w, a, side);
  };

  double rho_prev = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < opts.max_outer; ++it) {
    const Eigen::VectorXd b1 = a12 * w2;
    w1 = update_side(a1, b1, w2.dot(a2 * w2), opts.fixed_lambda1, 1, fit.lambda1, fit.bic_trace1);
    const Eigen::VectorXd b2 = a12.transpose() * w1;
    w2 = update_side(a2, b2, w1.dot(a1 * w1), opts.fixed_lambda2, 2, fit.lambda2, fit.bic_trace2);

    const double rho = w1.dot(a12 * w2);
    fit.rho_trace.push_back(rho);
    fit.outer_iterations = it + 1;
    if (it > 0 && std::abs(rho - rho_prev) < opts.outer_tol) {
      fit.converged = true;
      break;
    }
    rho_prev = rho;
  }

  double rho = w1.dot(a12 * w2);
  if (rho < 0.0) {
    w2 = -w2;
    rho = -rho;
  }
  for (Eigen::Index j = 0; j < p1; ++j) {
    if (w1(j) != 0.0) {
      if (w1(j) < 0.0) {
        w1 = -w1;
        w2 = -w2;
      }
      break;
    }
  }
  fit.w1_hat = std::move(w1);
  fit.w2_hat = std::move(w2);
  fit.rho_in_sample = rho;
  if (fit.truncated_paths > 0) {
    fit.warnings.push_back(std::to_string(fit.truncated_paths) +
                           " lambda paths stopped early: indefinite scatter made the lasso unbounded");
  }
  if (fit.lasso_nonconverged > 0) {
    fit.warnings.push_back(std::to_string(fit.lasso_nonconverged) + " lasso fits hit the sweep limit");
  }
  return fit;
}

}  // namespace sscca
