#pragma once

// Repeated random train/test splits of a real dataset: fit on the training
// part, score the correlation on the test part with the same estimator.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sscca/errors.hpp"
#include "sscca/estimators.hpp"
#include "sscca/harness/parallel.hpp"
#include "sscca/harness/tables.hpp"
#include "sscca/metrics.hpp"
#include "sscca/rng.hpp"
#include "sscca/sampling.hpp"
#include "sscca/scca_solver.hpp"

namespace sscca::harness {

struct SplitEvalSpec {
  double train_fraction = 0.8;
  int repetitions = 500;
  std::vector<EstimatorKind> methods{EstimatorKind::SampleCov, EstimatorKind::KendallBridge,
                                     EstimatorKind::SpatialSign};
  BicCriterion criterion = BicCriterion::BIC1;
  std::uint64_t seed = 1;
  SccaOptions solver{};
  EstimatorOptions estimators{};

  Eigen::Index train_size(Eigen::Index n) const {
    return static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
  }

  void validate(Eigen::Index n) const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw SpecError("train fraction must lie in (0, 1)");
    if (repetitions < 1) throw SpecError("repetitions must be at least 1");
    if (methods.empty()) throw SpecError("split evaluation needs at least one method");
    if (n < 10) throw SpecError("split evaluation needs at least 10 observations, got " + std::to_string(n));
    const Eigen::Index n_train = train_size(n);
    if (n - n_train < 3) {
      throw SpecError("test split has " + std::to_string(n - n_train) + " observations; at least 3 are needed");
    }
    if (n_train < 2) throw SpecError("training split is too small");
  }
};

struct SplitRecord {
  int repetition = 0;
  EstimatorKind method = EstimatorKind::SpatialSign;
  bool excluded = false;
  std::string error;
  double rho_test = 0.0;
  Eigen::Index selected1 = 0;
  Eigen::Index selected2 = 0;
};

struct SplitSummary {
  EstimatorKind method = EstimatorKind::SpatialSign;
  int used = 0;
  int excluded = 0;
  double rho_test_mean = 0.0, rho_test_sd = 0.0;
  double selected1_mean = 0.0, selected1_sd = 0.0;
  double selected2_mean = 0.0, selected2_sd = 0.0;
};

struct SplitEvalResult {
  std::vector<SplitRecord> records;  // ordered by repetition, then method
  std::vector<SplitSummary> summary;
};

/// Indices 0..n-1 in random order (Fisher-Yates).
inline std::vector<Eigen::Index> random_permutation(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

namespace detail {

inline void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (v.empty()) {
    mean = sd = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  for (double x : v) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
}

}  // namespace detail

inline SplitEvalResult run_split_eval(const Dataset& ds, const SplitEvalSpec& spec, int threads = 0) {
  ds.validate();
  spec.validate(ds.n());
  const Eigen::Index n = ds.n();
  const Eigen::Index n_train = spec.train_size(n);
  const std::size_t m = spec.methods.size();

  std::vector<std::vector<SplitRecord>> slots(static_cast<std::size_t>(spec.repetitions));
  parallel_for(slots.size(), threads, [&](std::size_t rep) {
    Rng rng = make_stream(spec.seed, {static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(StreamPurpose::SplitDraw)});
    const auto perm = random_permutation(n, rng);
    Eigen::MatrixXd train(n_train, ds.p());
    Eigen::MatrixXd test(n - n_train, ds.p());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index src = perm[static_cast<std::size_t>(i)];
      if (i < n_train) {
        train.row(i) = ds.data.row(src);
      } else {
        test.row(i - n_train) = ds.data.row(src);
      }
    }
    slots[rep].reserve(m);
    for (auto method : spec.methods) {
      SplitRecord r;
      r.repetition = static_cast<int>(rep);
      r.method = method;
      try {
        const CovBlocks train_blocks = estimate(method, train, ds.split_col, spec.estimators);
        const CcaFit fit = fit_scca(train_blocks, n_train, spec.criterion, spec.solver);
        const CovBlocks test_blocks = estimate(method, test, ds.split_col, spec.estimators);
        r.rho_test = oos_correlation(fit.w1_hat, fit.w2_hat, test_blocks);
        r.selected1 = fit.support1();
        r.selected2 = fit.support2();
      } catch (const NumericalError& e) {
        r.excluded = true;
        r.error = e.what();
      } catch (const UndefinedMetricError& e) {
        r.excluded = true;
        r.error = e.what();
      }
      slots[rep].push_back(std::move(r));
    }
  });

  SplitEvalResult out;
  for (auto& s : slots) {
    for (auto& r : s) out.records.push_back(std::move(r));
  }
  for (auto method : spec.methods) {
    SplitSummary s;
    s.method = method;
    std::vector<double> rho, sel1, sel2;
    for (const auto& r : out.records) {
      if (r.method != method) continue;
      if (r.excluded) {
        ++s.excluded;
        continue;
      }
      rho.push_back(r.rho_test);
      sel1.push_back(static_cast<double>(r.selected1));
      sel2.push_back(static_cast<double>(r.selected2));
    }
    s.used = static_cast<int>(rho.size());
    detail::mean_sd(rho, s.rho_test_mean, s.rho_test_sd);
    detail::mean_sd(sel1, s.selected1_mean, s.selected1_sd);
    detail::mean_sd(sel2, s.selected2_mean, s.selected2_sd);
    out.summary.push_back(s);
  }
  return out;
}

inline std::string split_summary_csv(const SplitEvalResult& r) {
  std::ostringstream os;
  os << "method,rho_test_mean,rho_test_sd,selected1_mean,selected1_sd,selected2_mean,selected2_sd,excluded\n";
  for (const auto& s : r.summary) {
    os << method_name(s.method);
    for (double v : {s.rho_test_mean, s.rho_test_sd, s.selected1_mean, s.selected1_sd, s.selected2_mean, s.selected2_sd}) {
      os << ',' << format_exact(v);
    }
    os << ',' << s.excluded << '\n';
  }
  return os.str();
}

/// mean (sd) cells at three decimals for rho and one for counts.
inline std::string split_summary_markdown(const SplitEvalResult& r) {
  auto cell = [](double mean, double sd, int digits) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*f (%.*f)", digits, mean, digits, sd);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "| method | rho_test | selected1 | selected2 | excluded |\n| --- | ---: | ---: | ---: | ---: |\n";
  for (const auto& s : r.summary) {
    os << "| " << method_name(s.method) << " | " << cell(s.rho_test_mean, s.rho_test_sd, 3) << " | "
       << cell(s.selected1_mean, s.selected1_sd, 1) << " | " << cell(s.selected2_mean, s.selected2_sd, 1) << " | "
       << s.excluded << " |\n";
  }
  return os.str();
}

inline std::string split_records_jsonl(const SplitEvalResult& r) {
  std::ostringstream os;
  for (const auto& rec : r.records) {
    json j{{"repetition", rec.repetition}, {"method", method_name(rec.method)}, {"excluded", rec.excluded},
           {"rho_test", rec.rho_test},     {"selected1", rec.selected1},       {"selected2", rec.selected2}};
    if (!rec.error.empty()) j["error"] = rec.error;
    os << j.dump() << '\n';
  }
  return os.str();
}

}  // namespace sscca::harness
