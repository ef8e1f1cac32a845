// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sscca/harness/experiment.hpp"
#include "sscca/sscca.hpp"

using namespace sscca;
using namespace sscca::harness;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ExperimentResult run_cell(DistributionKind dist, Eigen::Index n, std::vector<EstimatorKind> methods) {
  ExperimentSpec spec;
  spec.models = {ModelKind::I};
  spec.distributions = {dist};
  spec.n_list = {n};
  spec.p_list = {400};
  spec.methods = std::move(methods);
  spec.replications = 100;
  spec.seed = 2024;
  return run_simulation(spec);
}

const CellAggregate& cell_of(const ExperimentResult& r, EstimatorKind m) {
  for (const auto& c : r.cells) {
    if (c.method == m) return c;
  }
  throw std::runtime_error("missing method in result");
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto s = default_marginal(100);
  const auto m = build_model_I(s, s, 0.9);
  CovBlocks b;
  b.s1 = m.sigma1;
  b.s2 = m.sigma2;
  b.s12 = m.sigma12;
  const auto fit = fit_scca(b, 1000, BicCriterion::BIC1);
  const double c1 = cos2_angle(fit.w1_hat, m.w1_star);
  const double c2 = cos2_angle(fit.w2_hat, m.w2_star);
  const double rho = oos_correlation(fit.w1_hat, fit.w2_hat, m);
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = c1 > 0.999 && c2 > 0.999 && std::abs(rho - 0.9) <= 1e-3 && t < 5.0;
  o.detail = "cos2 = " + fmt("%.6f", c1) + ", " + fmt("%.6f", c2) + "; rho = " + fmt("%.6f", rho) + "; " +
             fmt("%.2f s", t);
  return o;
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  const auto r = run_cell(DistributionKind::Normal, 200, {EstimatorKind::SampleCov, EstimatorKind::SpatialSign});
  const double ss = cell_of(r, EstimatorKind::SpatialSign).abs_gap_x100;
  const double sc = cell_of(r, EstimatorKind::SampleCov).abs_gap_x100;
  Outcome o;
  o.pass = ss >= 0.4 && ss <= 1.2 && sc >= 0.4 && sc <= 1.2;
  o.detail = "error x100: SSCCA " + fmt("%.3f", ss) + ", SCCA " + fmt("%.3f", sc) + "; " +
             fmt("%.0f s", seconds_since(t0));
  return o;
}

Outcome criterion3() {
  const auto t0 = Clock::now();
  const auto r = run_cell(DistributionKind::StudentT3Scaled, 200,
                          {EstimatorKind::SampleCov, EstimatorKind::KendallBridge, EstimatorKind::SpatialSign});
  const double ss = cell_of(r, EstimatorKind::SpatialSign).abs_gap_x100;
  const double ks = cell_of(r, EstimatorKind::KendallBridge).abs_gap_x100;
  const double sc = cell_of(r, EstimatorKind::SampleCov).abs_gap_x100;
  Outcome o;
  o.pass = ss < ks && ks < sc && ss < sc / 5.0;
  o.detail = "error x100: SSCCA " + fmt("%.3f", ss) + ", KSCCA " + fmt("%.3f", ks) + ", SCCA " + fmt("%.3f", sc) +
             "; " + fmt("%.0f s", seconds_since(t0));
  return o;
}

Outcome criterion4() {
  const auto t0 = Clock::now();
  const auto r = run_cell(DistributionKind::MixtureNormalScaled, 300,
                          {EstimatorKind::SampleCov, EstimatorKind::SpatialSign});
  const auto& ss = cell_of(r, EstimatorKind::SpatialSign);
  const auto& sc = cell_of(r, EstimatorKind::SampleCov);
  Outcome o;
  o.pass = ss.loss1_x100 < 1.0 && ss.loss2_x100 < 1.0 && sc.loss1_x100 > 2.0 * ss.loss1_x100 &&
           sc.loss2_x100 > 2.0 * ss.loss2_x100;
  o.detail = "loss x100 (L1/L2): SSCCA " + fmt("%.3f", ss.loss1_x100) + "/" + fmt("%.3f", ss.loss2_x100) + ", SCCA " +
             fmt("%.3f", sc.loss1_x100) + "/" + fmt("%.3f", sc.loss2_x100) + "; " + fmt("%.0f s", seconds_since(t0));
  return o;
}

Outcome criterion5() {
  const auto t0 = Clock::now();
  const auto r = run_cell(DistributionKind::StudentT3Scaled, 300, {EstimatorKind::SpatialSign});
  const auto& c = cell_of(r, EstimatorKind::SpatialSign);
  Outcome o;
  o.pass = c.fpr1_x100 < 1.0 && c.fpr2_x100 < 1.0 && c.fnr1_x100 < 2.0 && c.fnr2_x100 < 2.0;
  o.detail = "SSCCA x100: FPR1 " + fmt("%.3f", c.fpr1_x100) + ", FNR1 " + fmt("%.3f", c.fnr1_x100) + ", FPR2 " +
             fmt("%.3f", c.fpr2_x100) + ", FNR2 " + fmt("%.3f", c.fnr2_x100) + "; " + fmt("%.0f s", seconds_since(t0));
  return o;
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  double worst_gap = 0.0, worst_kkt = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = make_stream(seed, {1006});
    std::normal_distribution<double> z;
    Eigen::Matrix3d g;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) g(i, j) = z(rng);
    }
    const Eigen::Matrix3d a = g * g.transpose() + 0.1 * Eigen::Matrix3d::Identity();
    const Eigen::Vector3d b(z(rng), z(rng), z(rng));
    const double lambda = std::uniform_real_distribution<double>(0.0, 2.0 * b.cwiseAbs().maxCoeff())(rng);
    LassoSubproblem sub{a, b, lambda};
    const auto sol = solve_lasso_qp(sub, Eigen::VectorXd::Zero(3));
    double best = 0.0;
    oracle::lasso_brute_force(a, b, lambda, &best);
    worst_gap = std::max(worst_gap, std::abs(sub.objective(sol.w) - best));
    worst_kkt = std::max(worst_kkt, kkt_violation(sub, sol.w));
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = worst_gap <= 1e-6 && worst_kkt <= 1e-6 && t < 1.0;
  o.detail = "max objective gap " + fmt("%.2e", worst_gap) + ", max KKT violation " + fmt("%.2e", worst_kkt) + "; " +
             fmt("%.3f s", t);
  return o;
}

Outcome criterion7() {
  double worst = 0.0;
  bool monotone = true, converged = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(seed, {1007});
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(50, 2);
    for (Eigen::Index i = 0; i < 50; ++i) {
      x(i, 0) = z(rng);
      x(i, 1) = 0.5 * x(i, 0) + 2.0 * z(rng);
    }
    const auto r = spatial_median(x);
    converged = converged && r.converged;
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
      if (r.objective_trace[k] > r.objective_trace[k - 1] * (1.0 + 1e-12)) monotone = false;
    }
    worst = std::max(worst, (r.mu_hat - oracle::grid_search_median(x)).norm());
  }
  Outcome o;
  o.pass = worst <= 2e-3 && monotone && converged;
  o.detail = "max distance to grid minimizer " + fmt("%.2e", worst) + (monotone ? ", descent monotone" : ", descent NOT monotone");
  return o;
}

double median_error(Eigen::Index n, Eigen::Index p) {
  std::vector<double> errs;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng = make_stream(seed, {1008, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p)});
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = z(rng);
    }
    const auto b = scaled_sscm(x, p / 2);
    errs.push_back((b.full() - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff());
  }
  std::nth_element(errs.begin(), errs.begin() + 25, errs.end());
  const double hi = errs[25];
  std::nth_element(errs.begin(), errs.begin() + 24, errs.end());
  return 0.5 * (errs[24] + hi);
}

Outcome criterion8() {
  const auto t0 = Clock::now();
  const double n1 = median_error(100, 50), n2 = median_error(400, 50), n3 = median_error(1600, 50);
  const double p1 = median_error(400, 20), p2 = median_error(400, 80), p3 = median_error(400, 320);
  const double t = seconds_since(t0);
  Outcome o;
  const bool along_n = n2 <= n1 && n3 <= n2;
  const bool along_p = p2 <= p1 && p3 <= p2;
  o.pass = along_n && along_p && t < 120.0;
  o.detail = "along n: " + fmt("%.4f", n1) + " " + fmt("%.4f", n2) + " " + fmt("%.4f", n3) + (along_n ? " (ok)" : " (increases)") +
             "; along p: " + fmt("%.4f", p1) + " " + fmt("%.4f", p2) + " " + fmt("%.4f", p3) +
             (along_p ? " (ok)" : " (increases)") + "; " + fmt("%.1f s", t);
  return o;
}

Outcome criterion9() {
  Rng rng = make_stream(9, {1009});
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> radius(1e-3, 1e3);
  Eigen::MatrixXd x(80, 10);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = z(rng) + (j ? 0.4 * x(i, j - 1) : 0.0);
  }
  Eigen::MatrixXd y = x;
  for (Eigen::Index i = 0; i < y.rows(); ++i) y.row(i) *= radius(rng);
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(10);
  const double radial = (spatial_sign_cov(x, origin).matrix - spatial_sign_cov(y, origin).matrix).cwiseAbs().maxCoeff();

  Eigen::MatrixXd t = x;
  t.col(0) = x.col(0).array().exp();
  t.col(1) = x.col(1).array().cube();
  t.col(2) = x.col(2).array().atan();
  t.col(3) = 5.0 * x.col(3).array() - 2.0;
  t.col(4) = -(-x.col(4).array()).exp();
  const double monotone = (kendall_correlation_matrix(x) - kendall_correlation_matrix(t)).cwiseAbs().maxCoeff();
  Outcome o;
  o.pass = radial <= 4.0 * std::numeric_limits<double>::epsilon() && monotone == 0.0;
  o.detail = "SSCM radial max diff " + fmt("%.2e", radial) + ", Kendall monotone max diff " + fmt("%.2e", monotone);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / "sscca_acceptance_determinism";
  fs::remove_all(root);
  const std::string grid =
      " simulate --model I II --dist normal t3 mixture --n 60 --p 120 --replications 3 --methods SCCA KSCCA SSCCA";
  int failures = 0;
  auto run = [&](const std::string& name, int threads) {
    const std::string cmd = std::string(SSCCA_CLI_PATH) + " --seed 17 --threads " + std::to_string(threads) +
                            " --out-dir " + (root / name).string() + grid + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failures;
  };
  run("a", 1);
  run("b", 1);
  run("c", 8);
  std::size_t files = 0;
  bool identical = failures == 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    if (name == "timing.json" || name == "checkpoint.jsonl") continue;
    ++files;
    const std::string a = slurp(entry.path());
    identical = identical && !a.empty() && a == slurp(root / "b" / name) && a == slurp(root / "c" / name);
  }
  Outcome o;
  o.pass = identical && files >= 10;
  o.detail = std::to_string(files) + " output files compared across two 1-thread runs and one 8-thread run" +
             (failures ? "; a run failed" : "");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"population oracle", criterion1},       {"normal error band", criterion2},
      {"heavy-tail ordering", criterion3},     {"mixture loss ordering", criterion4},
      {"selection rates", criterion5},         {"lasso oracle", criterion6},
      {"spatial median oracle", criterion7},   {"sign covariance rate", criterion8},
      {"estimator invariances", criterion9},   {"determinism", criterion10},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
