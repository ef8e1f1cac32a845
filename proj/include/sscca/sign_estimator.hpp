#pragma once

// Spatial median (Weiszfeld with the Vardi-Zhang correction for iterates
// that land on a data point) and the spatial-sign covariance matrix.

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "sscca/cov_blocks.hpp"
#include "sscca/errors.hpp"

namespace sscca {

/// U(x) = x / |x|, and 0 at the origin.
inline Eigen::VectorXd spatial_sign(const Eigen::VectorXd& x) {
  const double norm = x.norm();
  if (norm == 0.0) return Eigen::VectorXd::Zero(x.size());
  return x / norm;
}

struct SpatialMedianOptions {
  double tol = 1e-8;  // relative to the data scale
  int max_iter = 500;
};

struct SpatialMedianResult {
  Eigen::VectorXd mu_hat;
  int iterations = 0;
  double final_step_norm = 0.0;
  bool converged = false;
  /// Objective sum_i |x_i - mu| at every iterate, starting from the initial point.
  std::vector<double> objective_trace;
  /// Iterations on which the current point coincided with at least one row.
  int coincident_iterations = 0;
};

namespace detail {

inline Eigen::VectorXd coordinate_median(const Eigen::Ref<const Eigen::MatrixXd>& data) {
  const Eigen::Index n = data.rows();
  Eigen::VectorXd med(data.cols());
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = data(i, j);
    std::sort(col.begin(), col.end());
    const std::size_t mid = col.size() / 2;
    med(j) = col.size() % 2 == 1 ? col[mid] : 0.5 * (col[mid - 1] + col[mid]);
  }
  return med;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace detail

/// Minimizer of sum_i |x_i - mu|_2 over mu. Starts at the coordinate-wise
/// median. Stops when |mu(t+1) - mu(t)| <= tol * scale, where scale is the
/// median distance from the starting point to the rows.
inline SpatialMedianResult spatial_median(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                          const SpatialMedianOptions& opts = {}) {
  const Eigen::Index n = data.rows();
  if (n < 1 || data.cols() < 1) throw SpecError("spatial median needs a non-empty data matrix");

  SpatialMedianResult out;
  Eigen::VectorXd y = detail::coordinate_median(data);

  Eigen::VectorXd dist = (data.rowwise() - y.transpose()).rowwise().norm();
  double scale = detail::median_of(std::vector<double>(dist.data(), dist.data() + n));
  if (scale == 0.0) scale = dist.mean();
  if (scale == 0.0) {
    // every row equals the starting point
    out.mu_hat = y;
    out.converged = true;
    out.objective_trace.push_back(0.0);
    return out;
  }
  const double coincide = 1e-10 * scale;

  Eigen::VectorXd weighted_sum(data.cols());
  Eigen::VectorXd resultant(data.cols());
  for (int it = 0; it < opts.max_iter; ++it) {
    const double objective = dist.sum();
    assert(out.objective_trace.empty() || objective <= out.objective_trace.back() * (1.0 + 1e-12));
    out.objective_trace.push_back(objective);

    weighted_sum.setZero();
    double weight_total = 0.0;
    int coincident = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (dist(i) < coincide) {
        ++coincident;
        continue;
      }
      const double w = 1.0 / dist(i);
      weighted_sum.noalias() += w * data.row(i).transpose();
      weight_total += w;
    }
    if (weight_total == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd t_tilde = weighted_sum / weight_total;

    Eigen::VectorXd next;
    if (coincident == 0) {
      next = t_tilde;
    } else {
      // Vardi-Zhang: R(y) = sum_{x_i != y} (x_i - y)/|x_i - y| = weight_total * (T(y) - y).
      ++out.coincident_iterations;
      resultant = weight_total * (t_tilde - y);
      const double r = resultant.norm();
      if (r <= static_cast<double>(coincident)) {
        // the subgradient condition holds: y is the median
        out.converged = true;
        out.final_step_norm = 0.0;
        break;
      }
      const double gamma = static_cast<double>(coincident) / r;
      next = (1.0 - gamma) * t_tilde + gamma * y;
    }

    const double step = (next - y).norm();
    y = std::move(next);
    out.iterations = it + 1;
    out.final_step_norm = step;
    dist = (data.rowwise() - y.transpose()).rowwise().norm();
    if (step <= opts.tol * scale) {
      out.converged = true;
      out.objective_trace.push_back(dist.sum());
      break;
    }
  }
  out.mu_hat = std::move(y);
  return out;
}

struct SignCov {
  Eigen::MatrixXd matrix;  // unscaled, trace = 1 - zero_rows / n
  Eigen::Index zero_rows = 0;
};

/// (1/n) sum_i U(x_i - mu) U(x_i - mu)'. Rows equal to mu contribute nothing.
inline SignCov spatial_sign_cov(const Eigen::Ref<const Eigen::MatrixXd>& data, const Eigen::VectorXd& mu) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n < 1 || mu.size() != p) throw SpecError("spatial_sign_cov: dimension mismatch");

  Eigen::MatrixXd signs = data.rowwise() - mu.transpose();
  SignCov out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = signs.row(i).norm();
    if (norm == 0.0) {
      ++out.zero_rows;
    } else {
      signs.row(i) /= norm;
    }
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  s.selfadjointView<Eigen::Lower>().rankUpdate(signs.transpose(), 1.0 / static_cast<double>(n));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  out.matrix = std::move(s);
  return out;
}

/// p * S-hat centered at the spatial median and partitioned at split_col.
inline CovBlocks scaled_sscm(const Eigen::Ref<const Eigen::MatrixXd>& data, Eigen::Index split_col,
                             const SpatialMedianOptions& opts = {}) {
  if (data.rows() < 2) throw SpecError("spatial-sign covariance needs at least 2 rows");
  const SpatialMedianResult median = spatial_median(data, opts);
  const SignCov sign = spatial_sign_cov(data, median.mu_hat);
  const double p = static_cast<double>(data.cols());
  CovBlocks out = CovBlocks::partition(p * sign.matrix, split_col, EstimatorKind::SpatialSign, p);
  if (!median.converged) {
    out.warnings.push_back("spatial median did not converge in " + std::to_string(median.iterations) +
                           " iterations");
  }
  if (sign.zero_rows > 0) {
    out.warnings.push_back(std::to_string(sign.zero_rows) + " rows coincide with the spatial median");
  }
  return out;
}

}  // namespace sscca
