#pragma once

// Monte-Carlo simulation grid: model x distribution x n x p, with every
// method fitted on the same sampled dataset inside a replication.

#include <Eigen/Dense>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sscca/cov_models.hpp"
#include "sscca/errors.hpp"
#include "sscca/estimators.hpp"
#include "sscca/harness/parallel.hpp"
#include "sscca/metrics.hpp"
#include "sscca/rng.hpp"
#include "sscca/sampling.hpp"
#include "sscca/scca_solver.hpp"

namespace sscca::harness {

using json = nlohmann::json;

struct ExperimentSpec {
  std::vector<ModelKind> models{ModelKind::I};
  std::vector<DistributionKind> distributions{DistributionKind::Normal};
  std::vector<Eigen::Index> n_list{200};
  std::vector<Eigen::Index> p_list{400};  // total dimension p = p1 + p2, p1 = p2 = p / 2
  std::vector<EstimatorKind> methods{EstimatorKind::SampleCov, EstimatorKind::KendallBridge,
                                     EstimatorKind::SpatialSign};
  int replications = 100;
  std::uint64_t seed = 1;
  BicCriterion criterion = BicCriterion::BIC1;
  double phi1 = 0.9;
  ModelIIParams model2{};
  bool fixed_w_star = false;
  MixtureParams mixture{};
  SccaOptions solver{};
  EstimatorOptions estimators{};

  void validate() const {
    if (models.empty() || distributions.empty() || n_list.empty() || p_list.empty() || methods.empty()) {
      throw SpecError("experiment grid has an empty axis");
    }
    if (replications < 1) throw SpecError("replications must be at least 1");
    for (auto p : p_list) {
      if (p % 2 != 0) throw SpecError("p must be even (p1 = p2 = p/2), got " + std::to_string(p));
      if ((p / 2) % 5 != 0) throw SpecError("p/2 must be divisible by 5, got p = " + std::to_string(p));
      if (p / 2 < 11) throw SpecError("p/2 must be at least 11");
      for (auto m : models) {
        if (m == ModelKind::II && p / 2 <= model2.extra_rank + 1) {
          throw SpecError("Model II needs p/2 > extra_rank + 1");
        }
      }
    }
    for (auto n : n_list) {
      if (n < 2) throw SpecError("sample sizes must be at least 2");
    }
  }
};

struct CellKey {
  ModelKind model = ModelKind::I;
  DistributionKind distribution = DistributionKind::Normal;
  Eigen::Index n = 0;
  Eigen::Index p = 0;

  auto tie() const { return std::tuple(static_cast<int>(model), static_cast<int>(distribution), n, p); }
  bool operator==(const CellKey& o) const { return tie() == o.tie(); }
  bool operator<(const CellKey& o) const { return tie() < o.tie(); }
};

struct RawRecord {
  CellKey cell;
  EstimatorKind method = EstimatorKind::SpatialSign;
  int replication = 0;
  std::uint64_t dataset_hash = 0;
  bool degenerate = false;
  std::string error;
  EvalReport eval;
  Eigen::Index support1 = 0;
  Eigen::Index support2 = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double rho_in_sample = 0.0;
  int outer_iterations = 0;
  bool converged = false;
};

/// Means over replications, metric values multiplied by 100.
struct CellAggregate {
  CellKey cell;
  EstimatorKind method = EstimatorKind::SpatialSign;
  int replications = 0;
  int degenerate = 0;
  double abs_gap_x100 = 0.0;
  double loss1_x100 = 0.0;
  double loss2_x100 = 0.0;
  double fpr1_x100 = 0.0;
  double fnr1_x100 = 0.0;
  double fpr2_x100 = 0.0;
  double fnr2_x100 = 0.0;
  double support1 = 0.0;
  double support2 = 0.0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<CellAggregate> cells;
  std::vector<RawRecord> records;  // ordered by cell, replication, method
  double wall_time_seconds = 0.0;

  const CellAggregate* find(const CellKey& cell, EstimatorKind method) const {
    for (const auto& c : cells) {
      if (c.cell == cell && c.method == method) return &c;
    }
    return nullptr;
  }
};

/// FNV-1a over the bytes of the data matrix; logged per record so paired
/// comparisons can be checked after the fact.
inline std::uint64_t dataset_hash(const Eigen::MatrixXd& data) {
  std::uint64_t h = 1469598103934665603ull;
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t size = static_cast<std::size_t>(data.size()) * sizeof(double);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

// ---- JSON (de)serialization -------------------------------------------------

inline json to_json(const ExperimentSpec& s) {
  json j;
  for (auto m : s.models) j["models"].push_back(to_string(m));
  for (auto d : s.distributions) j["distributions"].push_back(to_string(d));
  j["n"] = s.n_list;
  j["p"] = s.p_list;
  for (auto m : s.methods) j["methods"].push_back(method_name(m));
  j["replications"] = s.replications;
  j["seed"] = s.seed;
  j["criterion"] = to_string(s.criterion);
  j["phi1"] = s.phi1;
  j["extra_rank"] = s.model2.extra_rank;
  j["extra_scale"] = s.model2.extra_scale;
  j["fixed_w_star"] = s.fixed_w_star;
  j["mixture_kappa"] = s.mixture.kappa;
  j["mixture_wide_weight"] = s.mixture.wide_weight;
  j["solver"] = {{"n_lambda", s.solver.n_lambda},
                 {"lambda_ratio", s.solver.lambda_ratio},
                 {"lasso_tol", s.solver.lasso.tol},
                 {"lasso_kkt_tol", s.solver.lasso.kkt_tol},
                 {"max_sweeps", s.solver.lasso.max_sweeps},
                 {"outer_tol", s.solver.outer_tol},
                 {"max_outer", s.solver.max_outer},
                 {"ridge", s.solver.ridge}};
  j["median_tol"] = s.estimators.median.tol;
  j["median_max_iter"] = s.estimators.median.max_iter;
  j["kendall_project_psd"] = s.estimators.kendall.project_psd;
  return j;
}

inline json to_json(const RawRecord& r) {
  json j;
  j["model"] = to_string(r.cell.model);
  j["distribution"] = to_string(r.cell.distribution);
  j["n"] = r.cell.n;
  j["p"] = r.cell.p;
  j["method"] = method_name(r.method);
  j["replication"] = r.replication;
  j["dataset_hash"] = r.dataset_hash;
  j["degenerate"] = r.degenerate;
  if (!r.error.empty()) j["error"] = r.error;
  j["rho_hat"] = r.eval.rho_hat;
  j["abs_rho_gap"] = r.eval.abs_rho_gap;
  j["loss1"] = r.eval.loss1;
  j["loss2"] = r.eval.loss2;
  j["fpr1"] = r.eval.fpr1;
  j["fnr1"] = r.eval.fnr1;
  j["fpr2"] = r.eval.fpr2;
  j["fnr2"] = r.eval.fnr2;
  j["cos2_angle1"] = r.eval.cos2_angle1;
  j["cos2_angle2"] = r.eval.cos2_angle2;
  j["support1"] = r.support1;
  j["support2"] = r.support2;
  j["lambda1"] = r.lambda1;
  j["lambda2"] = r.lambda2;
  j["rho_in_sample"] = r.rho_in_sample;
  j["outer_iterations"] = r.outer_iterations;
  j["converged"] = r.converged;
  return j;
}

inline RawRecord record_from_json(const json& j) {
  RawRecord r;
  r.cell.model = parse_model_kind(j.at("model").get<std::string>());
  r.cell.distribution = parse_distribution_kind(j.at("distribution").get<std::string>());
  r.cell.n = j.at("n").get<Eigen::Index>();
  r.cell.p = j.at("p").get<Eigen::Index>();
  r.method = parse_estimator_kind(j.at("method").get<std::string>());
  r.replication = j.at("replication").get<int>();
  r.dataset_hash = j.at("dataset_hash").get<std::uint64_t>();
  r.degenerate = j.at("degenerate").get<bool>();
  r.error = j.value("error", std::string{});
  r.eval.rho_hat = j.at("rho_hat").get<double>();
  r.eval.abs_rho_gap = j.at("abs_rho_gap").get<double>();
  r.eval.loss1 = j.at("loss1").get<double>();
  r.eval.loss2 = j.at("loss2").get<double>();
  r.eval.fpr1 = j.at("fpr1").get<double>();
  r.eval.fnr1 = j.at("fnr1").get<double>();
  r.eval.fpr2 = j.at("fpr2").get<double>();
  r.eval.fnr2 = j.at("fnr2").get<double>();
  r.eval.cos2_angle1 = j.at("cos2_angle1").get<double>();
  r.eval.cos2_angle2 = j.at("cos2_angle2").get<double>();
  r.support1 = j.at("support1").get<Eigen::Index>();
  r.support2 = j.at("support2").get<Eigen::Index>();
  r.lambda1 = j.at("lambda1").get<double>();
  r.lambda2 = j.at("lambda2").get<double>();
  r.rho_in_sample = j.at("rho_in_sample").get<double>();
  r.outer_iterations = j.at("outer_iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  return r;
}

// ---- one replication ----------------------------------------------------------

/// Builds the ground truth for a cell. Model II draws its bases from `rng`.
inline JointCovModel build_truth(ModelKind kind, Eigen::Index d, double phi1, const ModelIIParams& params, Rng& rng) {
  const Eigen::MatrixXd sigma = default_marginal(d);
  if (kind == ModelKind::I) return build_model_I(sigma, sigma, phi1);
  return build_model_II(sigma, sigma, phi1, params, rng);
}

/// Estimates, fits and scores one method on one dataset. A degenerate fit
/// scores as a zero direction: rho_hat = 0, L = 1, printed FPR = 1, FNR = 0.
inline RawRecord fit_and_score(const Dataset& ds, const JointCovModel& truth, EstimatorKind method,
                               const ExperimentSpec& spec) {
  RawRecord r;
  r.method = method;
  r.dataset_hash = dataset_hash(ds.data);
  try {
    const CovBlocks blocks = estimate(method, ds.data, ds.split_col, spec.estimators);
    const CcaFit fit = fit_scca(blocks, ds.n(), spec.criterion, spec.solver);
    r.eval = evaluate_against_truth(fit.w1_hat, fit.w2_hat, truth);
    r.support1 = fit.support1();
    r.support2 = fit.support2();
    r.lambda1 = fit.lambda1;
    r.lambda2 = fit.lambda2;
    r.rho_in_sample = fit.rho_in_sample;
    r.outer_iterations = fit.outer_iterations;
    r.converged = fit.converged;
  } catch (const NumericalError& e) {
    r.degenerate = true;
    r.error = e.what();
  } catch (const UndefinedMetricError& e) {
    r.degenerate = true;
    r.error = e.what();
  }
  if (r.degenerate) {
    r.eval = EvalReport{};
    r.eval.rho_hat = 0.0;
    r.eval.abs_rho_gap = truth.rho_star;
    r.eval.loss1 = 1.0;
    r.eval.loss2 = 1.0;
    r.eval.fpr1 = 1.0;
    r.eval.fpr2 = 1.0;
    r.eval.fnr1 = 0.0;
    r.eval.fnr2 = 0.0;
    r.support1 = 0;
    r.support2 = 0;
  }
  return r;
}

// ---- aggregation ----------------------------------------------------------------

inline std::vector<CellAggregate> aggregate(const std::vector<RawRecord>& records) {
  std::vector<CellAggregate> out;
  std::map<std::pair<CellKey, int>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::pair(r.cell, static_cast<int>(r.method));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      CellAggregate a;
      a.cell = r.cell;
      a.method = r.method;
      out.push_back(a);
    }
    CellAggregate& a = out[it->second];
    ++a.replications;
    a.degenerate += r.degenerate ? 1 : 0;
    a.abs_gap_x100 += r.eval.abs_rho_gap;
    a.loss1_x100 += r.eval.loss1;
    a.loss2_x100 += r.eval.loss2;
    a.fpr1_x100 += r.eval.fpr1;
    a.fnr1_x100 += r.eval.fnr1;
    a.fpr2_x100 += r.eval.fpr2;
    a.fnr2_x100 += r.eval.fnr2;
    a.support1 += static_cast<double>(r.support1);
    a.support2 += static_cast<double>(r.support2);
  }
  for (auto& a : out) {
    const double k = static_cast<double>(a.replications);
    for (double* v : {&a.abs_gap_x100, &a.loss1_x100, &a.loss2_x100, &a.fpr1_x100, &a.fnr1_x100, &a.fpr2_x100,
                      &a.fnr2_x100}) {
      *v = 100.0 * *v / k;
    }
    a.support1 /= k;
    a.support2 /= k;
  }
  return out;
}

// ---- the run loop ------------------------------------------------------------------

struct RunOptions {
  int threads = 0;  // 0 = hardware concurrency
  /// When set, completed batches are appended here and reloaded on resume.
  std::optional<std::filesystem::path> checkpoint;
  bool resume = false;
  int checkpoint_every = 50;
  /// Stop after this many freshly computed batches (simulates an interrupted run).
  std::optional<int> stop_after_batches;
  std::function<void(const std::string&)> log;
};

inline std::vector<CellKey> grid_cells(const ExperimentSpec& spec) {
  std::vector<CellKey> cells;
  for (auto m : spec.models) {
    for (auto d : spec.distributions) {
      for (auto p : spec.p_list) {
        for (auto n : spec.n_list) cells.push_back(CellKey{m, d, n, p});
      }
    }
  }
  return cells;
}

namespace detail {

inline std::uint64_t model_path_id(ModelKind m) { return m == ModelKind::I ? 1 : 2; }
inline std::uint64_t dist_path_id(DistributionKind d) { return static_cast<std::uint64_t>(d) + 1; }

inline std::map<std::tuple<CellKey, int, int>, RawRecord> load_checkpoint(const std::filesystem::path& path,
                                                                           const ExperimentSpec& spec) {
  std::map<std::tuple<CellKey, int, int>, RawRecord> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  if (!std::getline(in, line)) return done;
  const json header = json::parse(line);
  if (header.value("fingerprint", json{}) != to_json(spec)) {
    throw SpecError("checkpoint " + path.string() + " was written for a different experiment spec");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      break;  // torn final line from an interrupted write
    }
    RawRecord r = record_from_json(j);
    done[std::tuple(r.cell, r.replication, static_cast<int>(r.method))] = std::move(r);
  }
  return done;
}

}  // namespace detail

/// Runs every (cell, replication), fitting each method on the same dataset.
/// Results are deterministic given spec.seed and independent of the thread
/// count and of cell order.
inline ExperimentResult run_simulation(const ExperimentSpec& spec, const RunOptions& opts = {}) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  auto log = [&opts](const std::string& msg) {
    if (opts.log) opts.log(msg);
  };

  std::map<std::tuple<CellKey, int, int>, RawRecord> done;
  std::ofstream checkpoint;
  if (opts.checkpoint) {
    if (opts.resume) done = detail::load_checkpoint(*opts.checkpoint, spec);
    const bool append = opts.resume && !done.empty();
    checkpoint.open(*opts.checkpoint, append ? std::ios::app : std::ios::trunc);
    if (!checkpoint) throw SpecError("cannot write checkpoint " + opts.checkpoint->string());
    if (!append) checkpoint << json{{"fingerprint", to_json(spec)}}.dump() << '\n' << std::flush;
    if (!done.empty()) log("resuming with " + std::to_string(done.size()) + " checkpointed records");
  }

  ExperimentResult result;
  result.spec = spec;
  const std::size_t n_methods = spec.methods.size();
  const int batch = std::max(1, opts.checkpoint_every);
  int fresh_batches = 0;
  bool stopped = false;

  for (const CellKey& cell : grid_cells(spec)) {
    const Eigen::Index d = cell.p / 2;
    const std::uint64_t mid = detail::model_path_id(cell.model);
    const std::uint64_t did = detail::dist_path_id(cell.distribution);
    const auto un = static_cast<std::uint64_t>(cell.n);
    const auto up = static_cast<std::uint64_t>(cell.p);

    // Model I (and Model II with a fixed basis) share one truth across replications.
    std::shared_ptr<const JointCovModel> shared_truth;
    std::shared_ptr<const EllipticalSampler> shared_sampler;
    if (cell.model == ModelKind::I || spec.fixed_w_star) {
      Rng model_rng = make_stream(spec.seed, {mid, up, static_cast<std::uint64_t>(StreamPurpose::ModelDraw)});
      shared_truth = std::make_shared<const JointCovModel>(build_truth(cell.model, d, spec.phi1, spec.model2, model_rng));
      shared_sampler = std::make_shared<const EllipticalSampler>(*shared_truth);
    }

    for (int first = 0; first < spec.replications && !stopped; first += batch) {
      const int last = std::min(spec.replications, first + batch);
      const auto count = static_cast<std::size_t>(last - first);
      std::vector<std::vector<RawRecord>> slots(count);

      bool complete = true;
      for (int rep = first; rep < last && complete; ++rep) {
        for (auto m : spec.methods) {
          if (!done.count(std::tuple(cell, rep, static_cast<int>(m)))) complete = false;
        }
      }
      if (complete) {
        for (std::size_t i = 0; i < count; ++i) {
          for (auto m : spec.methods) {
            slots[i].push_back(done.at(std::tuple(cell, first + static_cast<int>(i), static_cast<int>(m))));
          }
        }
      } else {
        if (opts.stop_after_batches && fresh_batches >= *opts.stop_after_batches) {
          stopped = true;
          break;
        }
        parallel_for(count, opts.threads, [&](std::size_t i) {
          const auto rep = static_cast<std::uint64_t>(first) + i;
          std::shared_ptr<const JointCovModel> truth = shared_truth;
          std::shared_ptr<const EllipticalSampler> sampler = shared_sampler;
          if (!truth) {
            Rng model_rng =
                make_stream(spec.seed, {mid, up, rep, static_cast<std::uint64_t>(StreamPurpose::ModelDraw)});
            truth = std::make_shared<const JointCovModel>(
                build_truth(cell.model, d, spec.phi1, spec.model2, model_rng));
            sampler = std::make_shared<const EllipticalSampler>(*truth);
          }
          Rng data_rng =
              make_stream(spec.seed, {mid, did, un, up, rep, static_cast<std::uint64_t>(StreamPurpose::DataDraw)});
          const Dataset ds = sampler->sample(cell.distribution, cell.n, data_rng, spec.mixture);
          slots[i].reserve(n_methods);
          for (auto m : spec.methods) {
            RawRecord r = fit_and_score(ds, *truth, m, spec);
            r.cell = cell;
            r.replication = static_cast<int>(rep);
            slots[i].push_back(std::move(r));
          }
        });
        ++fresh_batches;
        if (checkpoint.is_open()) {
          for (const auto& reps : slots) {
            for (const auto& r : reps) checkpoint << to_json(r).dump() << '\n';
          }
          checkpoint << std::flush;
        }
        log("model " + std::string(to_string(cell.model)) + " " + to_string(cell.distribution) +
            " n=" + std::to_string(cell.n) + " p=" + std::to_string(cell.p) + ": replications " +
            std::to_string(first + 1) + "-" + std::to_string(last) + " done");
      }
      for (auto& reps : slots) {
        for (auto& r : reps) result.records.push_back(std::move(r));
      }
    }
    if (stopped) break;
  }

  result.cells = aggregate(result.records);
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace sscca::harness
