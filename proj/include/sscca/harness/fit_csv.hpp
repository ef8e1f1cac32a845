#pragma once

// One CCA fit on a user dataset, with a JSON report and a weights table.

#include <Eigen/Dense>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sscca/estimators.hpp"
#include "sscca/harness/csv_data.hpp"
#include "sscca/harness/tables.hpp"
#include "sscca/scca_solver.hpp"

namespace sscca::harness {

struct FitReport {
  EstimatorKind method = EstimatorKind::SpatialSign;
  BicCriterion criterion = BicCriterion::BIC1;
  CcaFit fit;
  std::vector<std::string> names1;
  std::vector<std::string> names2;
  std::vector<std::string> warnings;  // estimator and solver warnings
  Eigen::Index n = 0;
};

inline FitReport fit_dataset(const Dataset& ds, EstimatorKind method, BicCriterion criterion,
                             const SccaOptions& solver = {}, const EstimatorOptions& est = {}) {
  ds.validate();
  FitReport r;
  r.method = method;
  r.criterion = criterion;
  r.n = ds.n();
  const CovBlocks blocks = estimate(method, ds.data, ds.split_col, est);
  r.fit = fit_scca(blocks, ds.n(), criterion, solver);
  r.warnings = blocks.warnings;
  r.warnings.insert(r.warnings.end(), r.fit.warnings.begin(), r.fit.warnings.end());
  for (Eigen::Index j = 0; j < ds.p(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    std::string name = k < ds.column_names.size() ? ds.column_names[k] : "V" + std::to_string(j + 1);
    (j < ds.split_col ? r.names1 : r.names2).push_back(std::move(name));
  }
  return r;
}

/// side,variable,weight rows; each side sorted by |weight| descending, ties by
/// original column order.
inline std::string weights_csv(const FitReport& r) {
  std::ostringstream os;
  os << "side,variable,weight\n";
  auto emit = [&os](int side, const Eigen::VectorXd& w, const std::vector<std::string>& names) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(w.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&w](Eigen::Index a, Eigen::Index b) { return std::abs(w(a)) > std::abs(w(b)); });
    for (auto j : order) {
      os << side << ',' << names[static_cast<std::size_t>(j)] << ',' << format_exact(w(j)) << '\n';
    }
  };
  emit(1, r.fit.w1_hat, r.names1);
  emit(2, r.fit.w2_hat, r.names2);
  return os.str();
}

inline json report_json(const FitReport& r) {
  auto nonzero = [](const Eigen::VectorXd& w, const std::vector<std::string>& names) {
    json out = json::array();
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (w(j) != 0.0) out.push_back({{"variable", names[static_cast<std::size_t>(j)]}, {"weight", w(j)}});
    }
    return out;
  };
  json j;
  j["method"] = method_name(r.method);
  j["criterion"] = to_string(r.criterion);
  j["n"] = r.n;
  j["p1"] = r.fit.w1_hat.size();
  j["p2"] = r.fit.w2_hat.size();
  j["rho_in_sample"] = r.fit.rho_in_sample;
  j["lambda1"] = r.fit.lambda1;
  j["lambda2"] = r.fit.lambda2;
  j["selected1"] = r.fit.support1();
  j["selected2"] = r.fit.support2();
  j["outer_iterations"] = r.fit.outer_iterations;
  j["converged"] = r.fit.converged;
  j["lasso_nonconverged"] = r.fit.lasso_nonconverged;
  j["truncated_paths"] = r.fit.truncated_paths;
  j["rho_trace"] = r.fit.rho_trace;
  j["warnings"] = r.warnings;
  j["direction1"] = nonzero(r.fit.w1_hat, r.names1);
  j["direction2"] = nonzero(r.fit.w2_hat, r.names2);
  return j;
}

inline void write_fit_outputs(const FitReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "fit_report.json", report_json(r).dump(2) + "\n");
  write_text(dir / "fit_weights.csv", weights_csv(r));
}

}  // namespace sscca::harness
