#pragma once

// JSON run configuration. Layout:
//   {
//     "seed": 7, "threads": 4, "out_dir": "runs/a",
//     "solver":     {"n_lambda": 20, "lambda_ratio": 0.01, "lasso_tol": 1e-7, "lasso_kkt_tol": 1e-8,
//                    "max_sweeps": 10000,
//                    "outer_tol": 1e-5, "max_outer": 100, "ridge": 1e-8},
//     "estimators": {"median_tol": 1e-8, "median_max_iter": 500, "kendall_project_psd": false},
//     "simulate":   {"models": ["I"], "distributions": ["normal", "t3"], "n": [100, 200], "p": [400],
//                    "methods": ["SCCA", "SSCCA"], "replications": 100, "criterion": "BIC1",
//                    "phi1": 0.9, "extra_rank": 50, "extra_scale": 0.1, "fixed_w_star": false,
//                    "mixture_kappa": 10, "mixture_wide_weight": 0.2, "checkpoint_every": 50},
//     "split_eval": {"train_fraction": 0.8, "repetitions": 500, "methods": [...], "criterion": "BIC1"},
//     "fit":        {"data": "x.csv", "split_col": 120, "method": "SSCCA", "criterion": "BIC1"}
//   }
// Every key is optional. Command-line flags override the file.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "sscca/errors.hpp"
#include "sscca/harness/experiment.hpp"
#include "sscca/harness/split_eval.hpp"

namespace sscca::harness {

inline json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open config " + path.string());
  try {
    json j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    if (!j.is_object()) throw SpecError("config " + path.string() + " must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw SpecError("config " + path.string() + ": " + e.what());
  }
}

namespace detail {

inline void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw SpecError("config section '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw SpecError("unknown config key '" + section + "." + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SpecError("config key '" + section + "." + key + "' has the wrong type");
  }
}

template <class T, class Parse>
void read_list(const json& j, const char* key, std::vector<T>& out, Parse parse, const std::string& section) {
  if (!j.contains(key)) return;
  std::vector<std::string> names;
  read(j, key, names, section);
  out.clear();
  for (const auto& s : names) out.push_back(parse(s));
}

}  // namespace detail

inline void apply_solver_config(const json& root, SccaOptions& s) {
  if (!root.contains("solver")) return;
  const json& j = root.at("solver");
  detail::check_keys(j, "solver", {"n_lambda", "lambda_ratio", "lasso_tol", "lasso_kkt_tol", "max_sweeps", "outer_tol", "max_outer", "ridge"});
  detail::read(j, "n_lambda", s.n_lambda, "solver");
  detail::read(j, "lambda_ratio", s.lambda_ratio, "solver");
  detail::read(j, "lasso_tol", s.lasso.tol, "solver");
  detail::read(j, "lasso_kkt_tol", s.lasso.kkt_tol, "solver");
  detail::read(j, "max_sweeps", s.lasso.max_sweeps, "solver");
  detail::read(j, "outer_tol", s.outer_tol, "solver");
  detail::read(j, "max_outer", s.max_outer, "solver");
  detail::read(j, "ridge", s.ridge, "solver");
}

inline void apply_estimator_config(const json& root, EstimatorOptions& e) {
  if (!root.contains("estimators")) return;
  const json& j = root.at("estimators");
  detail::check_keys(j, "estimators", {"median_tol", "median_max_iter", "kendall_project_psd"});
  detail::read(j, "median_tol", e.median.tol, "estimators");
  detail::read(j, "median_max_iter", e.median.max_iter, "estimators");
  detail::read(j, "kendall_project_psd", e.kendall.project_psd, "estimators");
}

inline void check_root_keys(const json& root) {
  detail::check_keys(root, "<root>", {"seed", "threads", "out_dir", "solver", "estimators", "simulate", "split_eval", "fit"});
}

/// Fills an experiment spec from the config; also returns checkpoint_every.
inline void apply_experiment_config(const json& root, ExperimentSpec& spec, int& checkpoint_every) {
  check_root_keys(root);
  detail::read(root, "seed", spec.seed, "<root>");
  apply_solver_config(root, spec.solver);
  apply_estimator_config(root, spec.estimators);
  if (!root.contains("simulate")) return;
  const json& j = root.at("simulate");
  const std::string sec = "simulate";
  detail::check_keys(j, sec, {"models", "distributions", "n", "p", "methods", "replications", "criterion", "phi1",
                              "extra_rank", "extra_scale", "fixed_w_star", "mixture_kappa", "mixture_wide_weight",
                              "checkpoint_every"});
  detail::read_list(j, "models", spec.models, parse_model_kind, sec);
  detail::read_list(j, "distributions", spec.distributions, parse_distribution_kind, sec);
  detail::read(j, "n", spec.n_list, sec);
  detail::read(j, "p", spec.p_list, sec);
  detail::read_list(j, "methods", spec.methods, parse_estimator_kind, sec);
  detail::read(j, "replications", spec.replications, sec);
  if (j.contains("criterion")) {
    std::string c;
    detail::read(j, "criterion", c, sec);
    spec.criterion = parse_bic_criterion(c);
  }
  detail::read(j, "phi1", spec.phi1, sec);
  detail::read(j, "extra_rank", spec.model2.extra_rank, sec);
  detail::read(j, "extra_scale", spec.model2.extra_scale, sec);
  detail::read(j, "fixed_w_star", spec.fixed_w_star, sec);
  detail::read(j, "mixture_kappa", spec.mixture.kappa, sec);
  detail::read(j, "mixture_wide_weight", spec.mixture.wide_weight, sec);
  detail::read(j, "checkpoint_every", checkpoint_every, sec);
}

inline void apply_split_config(const json& root, SplitEvalSpec& spec) {
  check_root_keys(root);
  detail::read(root, "seed", spec.seed, "<root>");
  apply_solver_config(root, spec.solver);
  apply_estimator_config(root, spec.estimators);
  if (!root.contains("split_eval")) return;
  const json& j = root.at("split_eval");
  const std::string sec = "split_eval";
  detail::check_keys(j, sec, {"train_fraction", "repetitions", "methods", "criterion", "data", "split_col"});
  detail::read(j, "train_fraction", spec.train_fraction, sec);
  detail::read(j, "repetitions", spec.repetitions, sec);
  detail::read_list(j, "methods", spec.methods, parse_estimator_kind, sec);
  if (j.contains("criterion")) {
    std::string c;
    detail::read(j, "criterion", c, sec);
    spec.criterion = parse_bic_criterion(c);
  }
}

}  // namespace sscca::harness
