// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "rfpls/basis.hpp"
#include "rfpls/cli.hpp"
#include "rfpls/eval.hpp"
#include "rfpls/prm.hpp"
#include "rfpls/robust.hpp"
#include "rfpls/simgen.hpp"
#include "rfpls/simpls.hpp"
#include "rfpls/sofr.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace rfpls;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Accumulates named checks into a verdict.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      verdict_.pass = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& text) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += text;
  }
  Verdict done() {
    verdict_.detail = verdict_.pass ? notes_ : "failed: " + failures_ + (notes_.empty() ? "" : " | " + notes_);
    return verdict_;
  }

 private:
  Verdict verdict_;
  std::string failures_;
  std::string notes_;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Verdict equivalence_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Checker c;
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> n_dist(10, 50), m_dist(1, 3), k_dist(4, 8);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = n_dist(rng);
    std::vector<int> sizes(static_cast<std::size_t>(m_dist(rng)));
    for (int& k : sizes) k = k_dist(rng);
    const auto design = testing::random_design(n, sizes, rng);
    const Eigen::VectorXd y = testing::random_vector(n, rng);
    const int h = std::min<int>(1 + rep % 6, static_cast<int>(design.total_basis()));
    const Eigen::MatrixXd functional = functional_pls_components(design, y, h);
    Eigen::MatrixXd scores = simpls_fit(design.transformed(), y, h).scores;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) scores.col(j).normalize();
    c.check(functional.cols() == scores.cols(), "component count differs in design " + std::to_string(rep));
    if (functional.cols() == scores.cols()) worst = std::max(worst, max_abs(functional - scores));
  }
  const double elapsed = seconds_since(start);
  c.check(worst < 1e-8, "max deviation " + num(worst));
  c.check(elapsed < 10.0, "runtime " + num(elapsed) + " s");
  c.note("max deviation " + num(worst));
  c.note("20 designs");
  return c.done();
}

Verdict reduction_suite() {
  const auto start = std::chrono::steady_clock::now();
  Checker c;
  std::mt19937_64 rng(1002);

  // (a) quadratic loss against an independent normal-equations solve
  double worst_ls = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd t = testing::random_matrix(60, 4, rng);
    const Eigen::VectorXd y = t * testing::random_vector(4, rng) + testing::random_vector(60, rng);
    MEstimateOptions opts;
    opts.quadratic_loss = true;
    const MEstimate m = m_estimate(t, y, 4.685, opts);
    const Eigen::VectorXd oracle = testing::normal_equations_ls(t, y);
    worst_ls = std::max(worst_ls, std::abs(m.intercept - oracle(0)));
    worst_ls = std::max(worst_ls, max_abs(m.delta - oracle.tail(4)));
  }
  c.check(worst_ls < 1e-10, "(a) deviation " + num(worst_ls));

  // (b) unit-weight PRM is bitwise SIMPLS; (c) unit-weighted SIMPLS
  bool exact = true;
  double worst_w = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd a = testing::random_matrix(40, 9, rng);
    const Eigen::VectorXd y = testing::random_vector(40, rng);
    const int h = 1 + rep % 5;
    PRMOptions opts;
    opts.unit_weights = true;
    const RobustPLSFit robust = prm_fit(a, y, h, opts);
    const PLSFit classical = simpls_fit(a, y, h);
    exact = exact && robust.pls.weights == classical.weights && robust.pls.scores == classical.scores &&
            robust.pls.gamma == classical.gamma && robust.pls.gamma0 == classical.gamma0 &&
            robust.pls.x_center == classical.x_center;
    const PLSFit weighted = weighted_simpls_fit(a, y, Eigen::VectorXd::Ones(40), h);
    worst_w = std::max({worst_w, max_abs(weighted.weights - classical.weights),
                        max_abs(weighted.scores - classical.scores), max_abs(weighted.gamma - classical.gamma),
                        std::abs(weighted.gamma0 - classical.gamma0)});
  }
  c.check(exact, "(b) unit-weight PRM differs from SIMPLS");
  c.check(worst_w < 1e-12, "(c) deviation " + num(worst_w));
  const double elapsed = seconds_since(start);
  c.check(elapsed < 5.0, "runtime " + num(elapsed) + " s");
  c.note("(a) " + num(worst_ls) + ", (b) exact, (c) " + num(worst_w));
  return c.done();
}

Verdict robust_primitives() {
  const auto start = std::chrono::steady_clock::now();
  Checker c;
  c.check(std::abs(hampel_f(1.0) - 1.0) < 1e-12, "hampel f(1.0)");
  c.check(std::abs(hampel_f(1.8) - 1.65) < 1e-12, "hampel f(1.8)");
  c.check(std::abs(hampel_f(2.5) - 0.86150) < 5e-6, "hampel f(2.5) = " + num(hampel_f(2.5)));
  c.check(hampel_f(4.0) == 0.0, "hampel f(4)");
  for (double cc : {1.0, 2.5, 4.685, 10.0}) {
    c.check(tukey_rho(0.0, cc) == 0.0, "rho(0)");
    c.check(tukey_rho(cc, cc) == 1.0 && tukey_rho(-cc, cc) == 1.0 && tukey_rho(3 * cc, cc) == 1.0, "rho beyond c");
    c.check(tukey_kappa(cc, cc) == 0.0 && tukey_kappa(-cc, cc) == 0.0, "kappa(c)");
  }
  Eigen::VectorXd v(5);
  v << 1, 2, 3, 4, 100;
  c.check(mad_scale(v).value == 1.0, "MAD of [1,2,3,4,100]");

  // L1 median of centrally symmetric sets is the centre.
  Eigen::MatrixXd square(4, 2);
  square << 1, 1, -1, 1, -1, -1, 1, -1;
  c.check(max_abs(l1_median(square)) < 1e-6, "square");
  Eigen::MatrixXd shifted(7, 3);
  shifted << 1, 0, 0, -1, 0, 0, 0, 2, 0, 0, -2, 0, 0, 0, 3, 0, 0, -3, 0, 0, 0;
  shifted.rowwise() += Eigen::RowVector3d(5, -2, 7);
  c.check(max_abs(l1_median(shifted).transpose() - Eigen::RowVector3d(5, -2, 7)) < 1e-6, "symmetric with centre");
  Eigen::MatrixXd line(5, 2);
  line << 0, 0, 1, 1, 2, 2, 3, 3, 40, 40;
  c.check(max_abs(l1_median(line) - Eigen::Vector2d(2, 2)) < 1e-6, "collinear");
  const double elapsed = seconds_since(start);
  c.check(elapsed < 1.0, "runtime " + num(elapsed) + " s");
  c.note("hampel f(2.5) = " + num(hampel_f(2.5)));
  return c.done();
}

struct MonteCarlo {
  ExperimentConfig config;
  ExperimentResult result;
  double seconds = 0.0;
};

const MonteCarlo& monte_carlo() {
  static const MonteCarlo mc = [] {
    MonteCarlo out;
    out.config.replications = 100;
    out.config.n_train = 200;
    out.config.n_test = 200;
    out.config.seed = 2024;
    out.config.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto start = std::chrono::steady_clock::now();
    out.result = run_experiment(out.config);
    out.seconds = seconds_since(start);
    return out;
  }();
  return mc;
}

Verdict robustness_under_contamination() {
  const MonteCarlo& mc = monte_carlo();
  Checker c;
  for (int m = 1; m <= 3; ++m) {
    const std::string target = "beta" + std::to_string(m);
    const double f = median_metric(mc.result, Method::FPLS, 0.10, "risee", target);
    const double r = median_metric(mc.result, Method::RFPLS, 0.10, "risee", target);
    c.check(r < f, target + " RFPLS " + num(r) + " not below FPLS " + num(f));
    c.check(f / r >= 1.5, target + " ratio " + num(f / r));
    c.note(target + " FPLS " + num(f) + " RFPLS " + num(r) + " ratio " + num(f / r));
  }
  c.check(mc.seconds < 15 * 60, "runtime " + num(mc.seconds) + " s");
  c.note("100 replications in " + num(mc.seconds) + " s");
  return c.done();
}

Verdict clean_efficiency() {
  const MonteCarlo& mc = monte_carlo();
  Checker c;
  const double f = median_metric(mc.result, Method::FPLS, 0.0, "trimmed_mspe", "test");
  const double r = median_metric(mc.result, Method::RFPLS, 0.0, "trimmed_mspe", "test");
  c.check(std::abs(r - f) <= 0.25 * f, "RFPLS " + num(r) + " vs FPLS " + num(f));
  c.note("trimmed MSPE FPLS " + num(f) + " RFPLS " + num(r));
  return c.done();
}

Verdict contamination_response() {
  const MonteCarlo& mc = monte_carlo();
  Checker c;
  double previous = -1.0;
  std::string trace;
  for (double level : mc.config.contamination_levels) {
    const double f = median_metric(mc.result, Method::FPLS, level, "trimmed_mspe", "test");
    c.check(f >= previous, "FPLS decreases at level " + num(level));
    previous = f;
    trace += (trace.empty() ? "" : " ") + num(f);
  }
  const double f10 = median_metric(mc.result, Method::FPLS, 0.10, "trimmed_mspe", "test");
  const double r10 = median_metric(mc.result, Method::RFPLS, 0.10, "trimmed_mspe", "test");
  c.check(r10 < f10, "RFPLS " + num(r10) + " not below FPLS " + num(f10) + " at 10%");
  c.note("FPLS by level " + trace);
  c.note("RFPLS at 10% " + num(r10));
  return c.done();
}

Verdict exact_recovery() {
  const auto start = std::chrono::steady_clock::now();
  Checker c;
  std::mt19937_64 rng(1007);
  const auto grid = testing::linspace(0.0, 1.0, 101);
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    // Raw curves and coefficient functions both inside the B-spline spans.
    const std::vector<int> sizes{6, 8, 5};
    std::vector<BasisSystem> systems;
    std::vector<Eigen::MatrixXd> raw;
    std::vector<std::vector<double>> grids(3, grid);
    std::vector<Eigen::VectorXd> b_true;
    const int n = 80;
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 0.5);
    for (int k : sizes) {
      systems.push_back(BasisSystem::bspline({0.0, 1.0}, k));
      const Eigen::MatrixXd coef = testing::random_matrix(n, k, rng);
      const Eigen::MatrixXd basis = evaluate_basis(systems.back(), grid);
      raw.push_back(coef * basis.transpose());
      b_true.push_back(testing::random_vector(k, rng));
      y += coef * gram_matrix(systems.back()) * b_true.back();
    }
    const auto design = build_design(raw, grids, systems);
    const FittedSofr fit = fit_fpls(design, y, static_cast<int>(design.total_basis()));
    const auto estimated = coefficient_functions(fit, grids);
    for (std::size_t m = 0; m < 3; ++m) {
      const Eigen::VectorXd truth = evaluate_basis(systems[m], grid) * b_true[m];
      worst = std::max(worst, risee(grid, truth, estimated[m]));
    }
  }
  c.check(worst < 1e-6, "worst RISEE " + num(worst));

  int correct = 0;
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::MatrixXd d = testing::random_matrix(60, 3, rng) * testing::random_matrix(3, 10, rng);
    const auto design = MultiFunctionalDesign::from_coefficients(d, {BasisSystem::bspline({0.0, 1.0}, 10)});
    const Eigen::VectorXd y = (design.coefficients() * design.gram() * testing::random_vector(10, rng)).array() - 1.0;
    const CVReport cv = select_num_components(design, y, 8, 5, 0.1, Method::FPLS, 70 + rep);
    correct += cv.chosen_h == 3 ? 1 : 0;
  }
  c.check(correct == 5, "CV chose 3 in " + std::to_string(correct) + " of 5 data sets");
  const double elapsed = seconds_since(start);
  c.check(elapsed < 30.0, "runtime " + num(elapsed) + " s");
  c.note("worst RISEE " + num(worst));
  c.note("CV chose 3 in 5 of 5");
  return c.done();
}

Verdict weight_identification() {
  Checker c;
  const std::uint64_t master = 808;
  std::vector<double> fractions;
  for (int rep = 0; rep < 20; ++rep) {
    const SimDataset clean = generate_clean(200, derive_seed(master, static_cast<std::uint64_t>(rep), 0));
    const SimDataset data = contaminate(clean, 0.10, derive_seed(master, static_cast<std::uint64_t>(rep), 1));
    std::vector<BasisSystem> systems(3, BasisSystem::bspline({0.0, 1.0}, 20));
    const auto design = build_design(data.curves, data.grids, systems);
    const CVReport cv = select_num_components(design, data.y, 8, 5, 0.1, Method::RFPLS,
                                              derive_seed(master, static_cast<std::uint64_t>(rep), 2));
    const FittedSofr fit = fit_rfpls(design, data.y, cv.chosen_h);
    int bad = 0, low = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      if (!data.contaminated[static_cast<std::size_t>(i)]) continue;
      ++bad;
      low += fit.robust->weights(i) < 0.5 ? 1 : 0;
    }
    fractions.push_back(static_cast<double>(low) / bad);
  }
  const double med = median(fractions);
  c.check(med >= 0.8, "median fraction " + num(med));
  c.note("median fraction " + num(med) + ", min " + num(*std::min_element(fractions.begin(), fractions.end())));
  return c.done();
}

Verdict determinism() {
  Checker c;
  const fs::path dir = fs::current_path() / "acceptance_scratch";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "exp.json");
    cfg << R"({"replications": 6, "contamination_levels": [0, 0.1], "n_train": 80, "n_test": 60,
               "num_basis": 12, "max_components": 5, "seed": 31})";
  }
  auto simulate = [&](const std::string& name, const std::string& workers) {
    const std::string config = (dir / "exp.json").string();
    const std::string out = (dir / name).string();
    const char* argv[] = {"rfpls", "simulate", "--config", config.c_str(), "--out", out.c_str(),
                          "--workers", workers.c_str()};
    std::ostringstream sink, err;
    const int code = cli::run(8, argv, sink, err);
    c.check(code == 0, name + " exit " + std::to_string(code) + " " + err.str());
    std::ifstream in(dir / name, std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return bytes.str();
  };
  const std::string first = simulate("run1.csv", "1");
  const std::string second = simulate("run2.csv", "1");
  const std::string pooled = simulate("run3.csv", "4");
  c.check(!first.empty(), "empty results");
  c.check(first == second, "two runs differ");
  c.check(first == pooled, "1 vs 4 workers differ");
  c.note(std::to_string(first.size()) + " bytes identical across 3 runs");
  return c.done();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"equivalence of functional and SIMPLS components", equivalence_oracle},
      {"reductions to least squares and SIMPLS", reduction_suite},
      {"robust primitives", robust_primitives},
      {"Monte Carlo at 10% contamination: RISEE", robustness_under_contamination},
      {"Monte Carlo on clean data: trimmed MSPE", clean_efficiency},
      {"trimmed MSPE across contamination levels", contamination_response},
      {"exact-model recovery and CV dimension", exact_recovery},
      {"contaminated rows identified by weights", weight_identification},
      {"simulate output is deterministic", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (v.pass ? "PASS" : "FAIL") << ": " << criteria[i].first << " ("
              << v.detail << ")" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
