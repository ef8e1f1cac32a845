// sscca: simulate | fit | split-eval | emit-tables

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sscca/harness/config.hpp"
#include "sscca/harness/csv_data.hpp"
#include "sscca/harness/experiment.hpp"
#include "sscca/harness/fit_csv.hpp"
#include "sscca/harness/split_eval.hpp"
#include "sscca/harness/tables.hpp"
#include "sscca/sscca.hpp"

namespace fs = std::filesystem;
using namespace sscca;
using namespace sscca::harness;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string config;
  std::optional<std::string> out_dir;
};

template <class T, class Parse>
std::vector<T> parse_all(const std::vector<std::string>& names, Parse parse) {
  std::vector<T> out;
  for (const auto& s : names) out.push_back(parse(s));
  return out;
}

json config_or_empty(const Globals& g) { return g.config.empty() ? json::object() : load_config(g.config); }

std::string out_dir(const Globals& g, const json& cfg, const std::string& fallback) {
  if (g.out_dir) return *g.out_dir;
  if (cfg.contains("out_dir")) return cfg.at("out_dir").get<std::string>();
  return fallback;
}

int threads(const Globals& g, const json& cfg) {
  if (g.threads) return *g.threads;
  if (cfg.contains("threads")) return cfg.at("threads").get<int>();
  return 0;
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse canonical correlation analysis with spatial-sign, Kendall and sample covariance"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Root random seed");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--config", g.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "Output directory");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo simulation grid")->fallthrough();
  std::vector<std::string> sim_models, sim_dists, sim_methods;
  std::vector<Eigen::Index> sim_n, sim_p;
  std::optional<int> sim_reps, sim_checkpoint_every;
  std::optional<std::string> sim_criterion;
  std::optional<double> sim_phi1;
  bool full_scale = false, fixed_w_star = false, resume = false;
  sim->add_option("--model", sim_models, "Models: I, II");
  sim->add_option("--dist", sim_dists, "Distributions: normal, t3, mixture");
  sim->add_option("--n", sim_n, "Sample sizes");
  sim->add_option("--p", sim_p, "Total dimensions p = p1 + p2");
  sim->add_option("--methods", sim_methods, "Methods: SCCA, KSCCA, SSCCA");
  sim->add_option("--replications", sim_reps, "Replications per cell (default 100)");
  sim->add_flag("--full-scale,--paper-scale", full_scale, "Use 1000 replications");
  sim->add_option("--criterion", sim_criterion, "BIC1 or BIC2");
  sim->add_option("--phi1", sim_phi1, "Leading canonical correlation");
  sim->add_flag("--fixed-w-star", fixed_w_star, "Model II: one basis draw per cell instead of per replication");
  sim->add_flag("--resume", resume, "Continue from the checkpoint in the output directory");
  sim->add_option("--checkpoint-every", sim_checkpoint_every, "Replications per checkpoint batch");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit sparse CCA once on a CSV file")->fallthrough();
  std::optional<std::string> fit_data, fit_method, fit_criterion;
  std::optional<Eigen::Index> fit_split;
  std::optional<double> fit_lambda1, fit_lambda2;
  fit->add_option("--data", fit_data, "CSV file with a header row");
  fit->add_option("--split-col", fit_split, "Number of columns in the first block");
  fit->add_option("--method", fit_method, "SCCA, KSCCA or SSCCA (default SSCCA)");
  fit->add_option("--criterion", fit_criterion, "BIC1 or BIC2 (default BIC1)");
  fit->add_option("--lambda1", fit_lambda1, "Fixed penalty for side 1 (skips BIC)");
  fit->add_option("--lambda2", fit_lambda2, "Fixed penalty for side 2 (skips BIC)");

  // split-eval
  auto* split = app.add_subcommand("split-eval", "Repeated train/test split evaluation on a CSV file")->fallthrough();
  std::optional<std::string> split_data, split_criterion;
  std::optional<Eigen::Index> split_col;
  std::optional<double> split_fraction;
  std::optional<int> split_reps;
  std::vector<std::string> split_methods;
  split->add_option("--data", split_data, "CSV file with a header row");
  split->add_option("--split-col", split_col, "Number of columns in the first block");
  split->add_option("--train-fraction", split_fraction, "Training share (default 0.8)");
  split->add_option("--repetitions", split_reps, "Number of random splits (default 500)");
  split->add_option("--methods", split_methods, "Methods: SCCA, KSCCA, SSCCA");
  split->add_option("--criterion", split_criterion, "BIC1 or BIC2 (default BIC1)");

  // emit-tables
  auto* emit = app.add_subcommand("emit-tables", "Rebuild tables from an aggregates.csv file")->fallthrough();
  std::string emit_input;
  std::string emit_format = "both";
  emit->add_option("--aggregates", emit_input, "aggregates.csv written by simulate")->required();
  emit->add_option("--format", emit_format, "csv, markdown or both")
      ->check(CLI::IsMember({"csv", "markdown", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const json cfg = config_or_empty(g);
    if (!cfg.empty()) check_root_keys(cfg);

    if (*sim) {
      ExperimentSpec spec;
      RunOptions run;
      apply_experiment_config(cfg, spec, run.checkpoint_every);
      if (g.seed) spec.seed = *g.seed;
      if (!sim_models.empty()) spec.models = parse_all<ModelKind>(sim_models, parse_model_kind);
      if (!sim_dists.empty()) spec.distributions = parse_all<DistributionKind>(sim_dists, parse_distribution_kind);
      if (!sim_n.empty()) spec.n_list = sim_n;
      if (!sim_p.empty()) spec.p_list = sim_p;
      if (!sim_methods.empty()) spec.methods = parse_all<EstimatorKind>(sim_methods, parse_estimator_kind);
      if (full_scale) spec.replications = 1000;
      if (sim_reps) spec.replications = *sim_reps;
      if (sim_criterion) spec.criterion = parse_bic_criterion(*sim_criterion);
      if (sim_phi1) spec.phi1 = *sim_phi1;
      if (fixed_w_star) spec.fixed_w_star = true;
      if (sim_checkpoint_every) run.checkpoint_every = *sim_checkpoint_every;
      spec.validate();

      const fs::path dir = out_dir(g, cfg, "sscca_out");
      fs::create_directories(dir);
      run.threads = threads(g, cfg);
      run.checkpoint = dir / "checkpoint.jsonl";
      run.resume = resume;
      run.log = log_line;
      const ExperimentResult result = run_simulation(spec, run);
      write_experiment_outputs(result, dir);
      int degenerate = 0;
      for (const auto& c : result.cells) degenerate += c.degenerate;
      std::cout << build_table(result.cells, spec.models.front(), TableKind::Error).markdown();
      if (degenerate > 0) std::cerr << degenerate << " degenerate fits were scored as zero directions\n";
      std::cerr << "wrote " << dir.string() << " (" << result.wall_time_seconds << " s)\n";
      return 0;
    }

    if (*fit) {
      const json section = cfg.value("fit", json::object());
      harness::detail::check_keys(section, "fit", {"data", "split_col", "method", "criterion", "lambda1", "lambda2"});
      std::string data = fit_data.value_or(section.value("data", std::string{}));
      if (data.empty()) throw SpecError("fit needs --data");
      const Eigen::Index col = fit_split.value_or(section.value("split_col", Eigen::Index{0}));
      if (col <= 0) throw SpecError("fit needs --split-col");
      const EstimatorKind method = parse_estimator_kind(fit_method.value_or(section.value("method", std::string("SSCCA"))));
      const BicCriterion crit = parse_bic_criterion(fit_criterion.value_or(section.value("criterion", std::string("BIC1"))));
      SccaOptions solver;
      EstimatorOptions est;
      apply_solver_config(cfg, solver);
      apply_estimator_config(cfg, est);
      if (section.contains("lambda1")) solver.fixed_lambda1 = section.at("lambda1").get<double>();
      if (section.contains("lambda2")) solver.fixed_lambda2 = section.at("lambda2").get<double>();
      if (fit_lambda1) solver.fixed_lambda1 = *fit_lambda1;
      if (fit_lambda2) solver.fixed_lambda2 = *fit_lambda2;

      const Dataset ds = load_csv_dataset(data, col);
      const FitReport report = fit_dataset(ds, method, crit, solver, est);
      const fs::path dir = out_dir(g, cfg, "sscca_fit");
      write_fit_outputs(report, dir);
      std::cout << method_name(method) << ": rho = " << report.fit.rho_in_sample << ", selected "
                << report.fit.support1() << " + " << report.fit.support2() << " variables\n";
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      return 0;
    }

    if (*split) {
      SplitEvalSpec spec;
      apply_split_config(cfg, spec);
      const json section = cfg.value("split_eval", json::object());
      if (g.seed) spec.seed = *g.seed;
      if (split_fraction) spec.train_fraction = *split_fraction;
      if (split_reps) spec.repetitions = *split_reps;
      if (!split_methods.empty()) spec.methods = parse_all<EstimatorKind>(split_methods, parse_estimator_kind);
      if (split_criterion) spec.criterion = parse_bic_criterion(*split_criterion);
      std::string data = split_data.value_or(section.value("data", std::string{}));
      if (data.empty()) throw SpecError("split-eval needs --data");
      const Eigen::Index col = split_col.value_or(section.value("split_col", Eigen::Index{0}));
      if (col <= 0) throw SpecError("split-eval needs --split-col");
      if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) throw SpecError("train fraction must lie in (0, 1)");
      if (spec.repetitions < 1) throw SpecError("repetitions must be at least 1");

      const Dataset ds = load_csv_dataset(data, col);
      const SplitEvalResult result = run_split_eval(ds, spec, threads(g, cfg));
      const fs::path dir = out_dir(g, cfg, "sscca_split");
      fs::create_directories(dir);
      write_text(dir / "split_summary.csv", split_summary_csv(result));
      write_text(dir / "split_summary.md", split_summary_markdown(result));
      write_text(dir / "split_records.jsonl", split_records_jsonl(result));
      std::cout << split_summary_markdown(result);
      return 0;
    }

    if (*emit) {
      std::ifstream in(emit_input);
      if (!in) throw DataError("cannot open " + emit_input);
      const auto cells = parse_aggregates_csv(in);
      const fs::path dir = out_dir(g, cfg, fs::path(emit_input).parent_path().string().empty()
                                               ? std::string(".")
                                               : fs::path(emit_input).parent_path().string());
      std::vector<fs::path> written;
      if (emit_format != "markdown") {
        auto w = emit_tables(cells, dir, TableFormat::Csv);
        written.insert(written.end(), w.begin(), w.end());
      }
      if (emit_format != "csv") {
        auto w = emit_tables(cells, dir, TableFormat::Markdown);
        written.insert(written.end(), w.begin(), w.end());
      }
      for (const auto& p : written) std::cout << p.string() << '\n';
      return 0;
    }
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
