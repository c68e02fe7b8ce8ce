#include "rfpls/simgen.hpp"

#include "rfpls/error.hpp"
#include "rfpls/eval.hpp"
#include "rfpls/robust.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <iterator>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>

namespace rfpls {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> unit_grid() {
  std::vector<double> grid(kSimGridPoints);
  for (int i = 0; i < kSimGridPoints; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (kSimGridPoints - 1);
  return grid;
}

// Integrals of v_j * beta_m, indexed [contaminated][m][j-1].
using IntegralTable = std::array<std::array<std::array<double, kSimTerms>, kSimPredictors>, 2>;

const IntegralTable& integral_table() {
  static const IntegralTable table = [] {
    IntegralTable t{};
    for (int c = 0; c < 2; ++c)
      for (int m = 0; m < kSimPredictors; ++m)
        for (int j = 1; j <= kSimTerms; ++j)
          t[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)][static_cast<std::size_t>(j - 1)] =
              sim_response_integral(j, m, c == 1);
    return t;
  }();
  return table;
}

// Draws one row of curves and the noise-free response part.
double draw_row(std::mt19937_64& rng, bool contaminated, const std::vector<double>& grid, Eigen::Index row,
                std::vector<Eigen::MatrixXd>& curves, std::vector<Eigen::MatrixXd>& kappa) {
  const auto& table = integral_table()[contaminated ? 1 : 0];
  double signal = 0.0;
  for (int m = 0; m < kSimPredictors; ++m) {
    auto& block = curves[static_cast<std::size_t>(m)];
    auto& scores = kappa[static_cast<std::size_t>(m)];
    block.row(row).setZero();
    for (int j = 1; j <= kSimTerms; ++j) {
      std::normal_distribution<double> dist(0.0, 2.0 * std::pow(j, -0.75));
      const double k = dist(rng);
      scores(row, j - 1) = k;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        block(row, static_cast<Eigen::Index>(g)) += k * sim_basis(j, grid[g], contaminated);
      }
      signal += k * table[static_cast<std::size_t>(m)][static_cast<std::size_t>(j - 1)];
    }
  }
  return signal;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

double sim_basis(int j, double t, bool contaminated) {
  const double arg = j * std::numbers::pi * t;
  return (contaminated ? 2.0 : 1.0) * std::sin(arg) - std::cos(arg);
}

double sim_beta(int m, double t) {
  const double pi = std::numbers::pi;
  switch (m) {
    case 0: return std::sin(2.0 * pi * t);
    case 1: return std::sin(3.0 * pi * t);
    case 2: return std::cos(2.0 * pi * t);
  }
  throw InputError("simulation has three coefficient functions");
}

double sim_response_integral(int j, int m, bool contaminated) {
  constexpr int intervals = 2000;
  const double h = 1.0 / intervals;
  auto f = [&](double t) { return sim_basis(j, t, contaminated) * sim_beta(m, t); };
  double sum = f(0.0) + f(1.0);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

SimDataset SimDataset::rows(std::span<const Eigen::Index> indices) const {
  SimDataset out;
  out.grids = grids;
  out.beta_true = beta_true;
  out.level = level;
  out.seed = seed;
  const auto n = static_cast<Eigen::Index>(indices.size());
  out.y.resize(n);
  for (std::size_t m = 0; m < curves.size(); ++m) {
    out.curves.emplace_back(n, curves[m].cols());
    out.kappa.emplace_back(n, kappa[m].cols());
  }
  out.contaminated.resize(indices.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = indices[static_cast<std::size_t>(i)];
    out.y(i) = y(src);
    out.contaminated[static_cast<std::size_t>(i)] = contaminated[static_cast<std::size_t>(src)];
    for (std::size_t m = 0; m < curves.size(); ++m) {
      out.curves[m].row(i) = curves[m].row(src);
      out.kappa[m].row(i) = kappa[m].row(src);
    }
  }
  return out;
}

SimDataset generate_clean(int n, std::uint64_t seed, const GeneratorOptions& options) {
  if (n < 2) throw InputError("simulation needs at least two observations");
  SimDataset data;
  data.seed = seed;
  const std::vector<double> grid = unit_grid();
  for (int m = 0; m < kSimPredictors; ++m) {
    data.grids.push_back(grid);
    Eigen::VectorXd beta(kSimGridPoints);
    for (int g = 0; g < kSimGridPoints; ++g) beta(g) = sim_beta(m, grid[static_cast<std::size_t>(g)]);
    data.beta_true.push_back(std::move(beta));
    data.curves.emplace_back(n, kSimGridPoints);
    data.kappa.emplace_back(n, kSimTerms);
  }
  data.y.resize(n);
  data.contaminated.assign(static_cast<std::size_t>(n), false);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double signal = draw_row(rng, false, grid, i, data.curves, data.kappa);
    data.y(i) = signal + options.noise_sd * noise(rng);
  }
  return data;
}

SimDataset contaminate(const SimDataset& clean, double level, std::uint64_t seed,
                       const GeneratorOptions& options) {
  if (!(level > 0.0 && level < 0.5)) throw InputError("contamination level must lie in (0, 0.5)");
  SimDataset data = clean;
  data.level = level;
  const Eigen::Index n = data.size();
  const auto count = static_cast<Eigen::Index>(std::lround(level * static_cast<double>(n)));

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(count));
  std::sort(order.begin(), order.end());

  std::normal_distribution<double> noise(0.0, options.outlier_noise_sd);
  for (Eigen::Index i : order) {
    const double signal = draw_row(rng, true, data.grids.front(), i, data.curves, data.kappa);
    data.y(i) = signal + noise(rng);
    data.contaminated[static_cast<std::size_t>(i)] = true;
  }
  return data;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("methods: at least one method is required");
  if (contamination_levels.empty()) throw ConfigError("contamination_levels: at least one level is required");
  for (double l : contamination_levels) {
    if (!(l >= 0.0 && l < 0.5)) throw ConfigError("contamination_levels: every level must lie in [0, 0.5)");
  }
  if (replications < 1) throw ConfigError("replications: must be positive");
  if (n_train < 1) throw ConfigError("n_train: must be positive");
  if (n_test < 1) throw ConfigError("n_test: must be positive");
  if (num_basis < 4) throw ConfigError("num_basis: must be at least 4 for cubic splines");
  if (num_basis > kSimGridPoints) throw ConfigError("num_basis: cannot exceed the number of grid points");
  if (max_components < 1) throw ConfigError("max_components: must be positive");
  if (cv_folds < 2) throw ConfigError("cv_folds: must be at least 2");
  if (n_train < 2 * cv_folds) throw ConfigError("n_train: must be at least twice cv_folds");
  if (!(trim_alpha >= 0.0 && trim_alpha < 0.5)) throw ConfigError("trim_alpha: must lie in [0, 0.5)");
  if (workers < 1) throw ConfigError("workers: must be positive");
}

namespace {

void run_cell(const ExperimentConfig& config, int replication, std::size_t level_index,
              const SimDataset& train, const Eigen::MatrixXd& test_coefficients,
              const Eigen::VectorXd& y_test, std::vector<ResultRow>& rows) {
  const double level = config.contamination_levels[level_index];
  std::vector<BasisSystem> systems;
  for (int m = 0; m < kSimPredictors; ++m) {
    systems.push_back(BasisSystem::bspline({0.0, 1.0}, config.num_basis));
  }

  auto emit = [&](Method method, std::string metric, std::string target, double value) {
    rows.push_back(ResultRow{replication, method, level, std::move(metric), std::move(target), value});
  };

  std::optional<MultiFunctionalDesign> design;
  std::string design_error;
  try {
    design = build_design(train.curves, train.grids, systems);
  } catch (const Error& e) {
    design_error = e.what();
  }

  for (Method method : config.methods) {
    if (!design) {
      emit(method, "error", design_error, std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    try {
      const std::uint64_t cv_seed =
          derive_seed(config.seed, static_cast<std::uint64_t>(replication), 1000 + level_index);
      const CVReport cv = select_num_components(*design, train.y, config.max_components, config.cv_folds,
                                                config.trim_alpha, method, cv_seed);
      const FittedSofr fit = fit_method(method, *design, train.y, cv.chosen_h);
      const Eigen::VectorXd pred = predict_coefficients(fit, test_coefficients);
      const std::vector<Eigen::VectorXd> curves = coefficient_functions(fit, train.grids);

      emit(method, "trimmed_mspe", "test", trimmed_mspe(y_test, pred, config.trim_alpha));
      emit(method, "trimmed_r2", "test", trimmed_r2(y_test, pred, config.trim_alpha));
      for (int m = 0; m < kSimPredictors; ++m) {
        const auto mi = static_cast<std::size_t>(m);
        emit(method, "risee", "beta" + std::to_string(m + 1),
             risee(train.grids[mi], train.beta_true[mi], curves[mi]));
      }
      emit(method, "components", "h", static_cast<double>(fit.components));
    } catch (const Error& e) {
      emit(method, "error", e.what(), std::numeric_limits<double>::quiet_NaN());
    }
  }
}

std::vector<ResultRow> run_replication(const ExperimentConfig& config, int replication) {
  const int n = config.n_train + config.n_test;
  const SimDataset pool = generate_clean(n, derive_seed(config.seed, static_cast<std::uint64_t>(replication)));

  std::vector<Eigen::Index> train_idx(static_cast<std::size_t>(config.n_train));
  std::vector<Eigen::Index> test_idx(static_cast<std::size_t>(config.n_test));
  std::iota(train_idx.begin(), train_idx.end(), Eigen::Index{0});
  std::iota(test_idx.begin(), test_idx.end(), Eigen::Index{config.n_train});
  const SimDataset clean_train = pool.rows(train_idx);
  const SimDataset test = pool.rows(test_idx);

  std::vector<BasisSystem> systems;
  for (int m = 0; m < kSimPredictors; ++m) systems.push_back(BasisSystem::bspline({0.0, 1.0}, config.num_basis));
  const Eigen::MatrixXd test_coefficients = smooth_predictors(test.curves, test.grids, systems);

  std::vector<ResultRow> rows;
  for (std::size_t l = 0; l < config.contamination_levels.size(); ++l) {
    const double level = config.contamination_levels[l];
    const SimDataset train =
        level > 0.0 ? contaminate(clean_train, level,
                                  derive_seed(config.seed, static_cast<std::uint64_t>(replication), l + 1))
                    : clean_train;
    run_cell(config, replication, l, train, test_coefficients, test.y, rows);
  }
  return rows;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto reps = static_cast<std::size_t>(config.replications);
  std::vector<std::vector<ResultRow>> per_rep(reps);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(reps);
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        per_rep[r] = run_replication(config, static_cast<int>(r));
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(config.workers), reps);
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
  }

  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentResult result;
  for (auto& rows : per_rep) {
    std::move(rows.begin(), rows.end(), std::back_inserter(result.rows));
  }
  return result;
}

double median_metric(const ExperimentResult& result, Method method, double level,
                     const std::string& metric, const std::string& target) {
  std::vector<double> values;
  for (const auto& row : result.rows) {
    if (row.method == method && row.level == level && row.metric == metric && row.target == target &&
        std::isfinite(row.value)) {
      values.push_back(row.value);
    }
  }
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return median(values);
}

}  // namespace rfpls
