#pragma once

// Comparison scatter estimators: the unbiased sample covariance and the
// Kendall-tau correlation matrix bridged through r = sin(pi * tau / 2).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sscca/cov_blocks.hpp"
#include "sscca/errors.hpp"

namespace sscca {

/// Unbiased sample covariance (divisor n - 1) of the full data matrix.
inline Eigen::MatrixXd sample_cov_matrix(const Eigen::Ref<const Eigen::MatrixXd>& data) {
  const Eigen::Index n = data.rows();
  if (n < 2) throw SpecError("sample covariance needs at least 2 rows");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(data.cols(), data.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(n - 1));
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

inline CovBlocks sample_cov(const Eigen::Ref<const Eigen::MatrixXd>& data, Eigen::Index split_col) {
  return CovBlocks::partition(sample_cov_matrix(data), split_col, EstimatorKind::SampleCov, 1.0);
}

namespace detail {

/// Dense ranks 0..k-1 of a column, with a stable argsort.
struct ColumnRanks {
  std::vector<std::int32_t> rank;
  std::vector<std::int32_t> order;  // row indices sorted by value
  double tied_pairs = 0.0;          // sum over tie groups of t(t-1)/2
  bool has_ties = false;
};

inline ColumnRanks rank_column(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto n = static_cast<std::int32_t>(x.size());
  ColumnRanks out;
  out.order.resize(static_cast<std::size_t>(n));
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&x](std::int32_t a, std::int32_t b) { return x(a) < x(b); });
  out.rank.assign(static_cast<std::size_t>(n), 0);
  std::int32_t r = 0;
  std::int32_t run = 1;
  for (std::int32_t k = 0; k < n; ++k) {
    if (k > 0) {
      if (x(out.order[k]) == x(out.order[k - 1])) {
        ++run;
      } else {
        out.tied_pairs += 0.5 * run * (run - 1.0);
        run = 1;
        ++r;
      }
    }
    out.rank[static_cast<std::size_t>(out.order[k])] = r;
  }
  out.tied_pairs += 0.5 * run * (run - 1.0);
  out.has_ties = out.tied_pairs > 0.0;
  return out;
}

/// Counts pairs i < j with y[i] > y[j] by merge sort; sorts y in place.
inline std::int64_t count_inversions(std::vector<std::int32_t>& y, std::vector<std::int32_t>& buffer) {
  const std::size_t n = y.size();
  buffer.resize(n);
  std::int64_t swaps = 0;
  // insertion sort on short runs first: each shift removes one inversion
  constexpr std::size_t kRun = 16;
  for (std::size_t lo = 0; lo < n; lo += kRun) {
    const std::size_t hi = std::min(lo + kRun, n);
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const std::int32_t v = y[i];
      std::size_t j = i;
      while (j > lo && y[j - 1] > v) {
        y[j] = y[j - 1];
        --j;
      }
      swaps += static_cast<std::int64_t>(i - j);
      y[j] = v;
    }
  }
  std::int32_t* src = y.data();
  std::int32_t* dst = buffer.data();
  for (std::size_t width = kRun; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        const bool right = src[j] < src[i];
        swaps += right ? static_cast<std::int64_t>(mid - i) : 0;
        dst[k++] = right ? src[j] : src[i];
        j += right;
        i += !right;
      }
      while (i < mid) dst[k++] = src[i++];
      while (j < hi) dst[k++] = src[j++];
    }
    std::swap(src, dst);
  }
  if (src != y.data()) std::copy(src, src + n, y.data());
  return swaps;
}

/// tau-b from precomputed ranks of both columns (Knight's algorithm).
/// Returns nullopt when either column is constant.
inline std::optional<double> kendall_tau_b_ranked(const ColumnRanks& x, const ColumnRanks& y,
                                                  std::vector<std::int32_t>& seq,
                                                  std::vector<std::int32_t>& buffer) {
  const std::size_t n = x.order.size();
  const double n0 = 0.5 * static_cast<double>(n) * (static_cast<double>(n) - 1.0);
  const double denom = (n0 - x.tied_pairs) * (n0 - y.tied_pairs);
  if (!(denom > 0.0)) return std::nullopt;

  seq.resize(n);
  for (std::size_t k = 0; k < n; ++k) seq[k] = y.rank[static_cast<std::size_t>(x.order[k])];

  double joint_ties = 0.0;
  if (x.has_ties) {
    std::size_t start = 0;
    while (start < n) {
      std::size_t end = start + 1;
      const std::int32_t rx = x.rank[static_cast<std::size_t>(x.order[start])];
      while (end < n && x.rank[static_cast<std::size_t>(x.order[end])] == rx) ++end;
      if (end - start > 1) {
        std::sort(seq.begin() + static_cast<std::ptrdiff_t>(start), seq.begin() + static_cast<std::ptrdiff_t>(end));
        std::size_t run = 1;
        for (std::size_t k = start + 1; k <= end; ++k) {
          if (k < end && seq[k] == seq[k - 1]) {
            ++run;
          } else {
            joint_ties += 0.5 * static_cast<double>(run) * (static_cast<double>(run) - 1.0);
            run = 1;
          }
        }
      }
      start = end;
    }
  }
  const auto discordant = static_cast<double>(count_inversions(seq, buffer));
  const double numerator = n0 - x.tied_pairs - y.tied_pairs + joint_ties - 2.0 * discordant;
  return numerator / std::sqrt(denom);
}

}  // namespace detail

/// Kendall's tau-b of two equally long samples in O(n log n).
/// Returns nullopt if either sample is constant.
inline std::optional<double> kendall_tau_b(const Eigen::Ref<const Eigen::VectorXd>& x,
                                           const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw SpecError("kendall_tau_b: length mismatch");
  if (x.size() < 2) throw SpecError("kendall_tau_b needs at least 2 observations");
  std::vector<std::int32_t> seq, buffer;
  return detail::kendall_tau_b_ranked(detail::rank_column(x), detail::rank_column(y), seq, buffer);
}

/// sin(pi * tau / 2): the correlation implied by tau under elliptical symmetry.
inline double kendall_bridge(double tau) { return std::sin(0.5 * std::numbers::pi * tau); }

struct KendallOptions {
  /// Clip negative eigenvalues and restore the unit diagonal afterwards.
  bool project_psd = false;
  double psd_floor = 1e-6;
};

/// Nearest-PSD repair by eigenvalue clipping, rescaled back to unit diagonal.
inline Eigen::MatrixXd project_to_psd_correlation(const Eigen::MatrixXd& r, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  const Eigen::VectorXd inv_sd = out.diagonal().cwiseSqrt().cwiseInverse();
  out = inv_sd.asDiagonal() * out * inv_sd.asDiagonal();
  out = 0.5 * (out + out.transpose());
  out.diagonal().setOnes();
  return out;
}

/// Bridged Kendall correlation matrix for every column pair, unit diagonal.
/// Pairs involving a constant column are set to 0 with a warning.
inline Eigen::MatrixXd kendall_correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                                  std::vector<std::string>* warnings = nullptr) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n < 2) throw SpecError("Kendall matrix needs at least 2 rows");

  std::vector<detail::ColumnRanks> ranks;
  ranks.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    ranks.push_back(detail::rank_column(data.col(j)));
    if (warnings && !(ranks.back().tied_pairs < 0.5 * n * (n - 1.0))) {
      warnings->push_back("column " + std::to_string(j + 1) + " is constant; its Kendall entries are set to 0");
    }
  }

  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(p, p);
  std::vector<std::int32_t> seq, buffer;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const auto tau = detail::kendall_tau_b_ranked(ranks[static_cast<std::size_t>(i)],
                                                    ranks[static_cast<std::size_t>(j)], seq, buffer);
      const double v = tau ? kendall_bridge(*tau) : 0.0;
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

inline CovBlocks kendall_tau_matrix(const Eigen::Ref<const Eigen::MatrixXd>& data, Eigen::Index split_col,
                                    const KendallOptions& opts = {}) {
  std::vector<std::string> warnings;
  Eigen::MatrixXd r = kendall_correlation_matrix(data, &warnings);
  if (opts.project_psd) r = project_to_psd_correlation(r, opts.psd_floor);
  CovBlocks out = CovBlocks::partition(r, split_col, EstimatorKind::KendallBridge, 1.0);
  out.warnings = std::move(warnings);
  return out;
}

}  // namespace sscca
