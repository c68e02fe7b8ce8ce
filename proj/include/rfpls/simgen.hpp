#pragma once

#include "rfpls/sofr.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rfpls {

/// Simulated scalar-on-function data with three predictors on [0,1].
///
/// Curves are X_m(t) = sum_{j=1}^{5} kappa_j v_j(t) with
/// kappa_j ~ N(0, 4 j^{-3/2}); clean rows use v_j = sin(j pi t) - cos(j pi t),
/// contaminated rows v_j = 2 sin(j pi t) - cos(j pi t).
/// Coefficient functions: sin(2 pi t), sin(3 pi t), cos(2 pi t).
struct SimDataset {
  std::vector<std::vector<double>> grids;  ///< one grid per predictor
  std::vector<Eigen::MatrixXd> curves;     ///< n x J per predictor
  Eigen::VectorXd y;
  std::vector<Eigen::VectorXd> beta_true;  ///< true beta_m on grids[m]
  std::vector<Eigen::MatrixXd> kappa;      ///< n x 5 expansion scores per predictor
  std::vector<bool> contaminated;
  double level = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return y.size(); }
  /// Rows in the given order; grids and true curves are shared.
  SimDataset rows(std::span<const Eigen::Index> indices) const;
};

inline constexpr int kSimPredictors = 3;
inline constexpr int kSimTerms = 5;
inline constexpr int kSimGridPoints = 200;

struct GeneratorOptions {
  double noise_sd = 1.0;
  double outlier_noise_sd = 10.0;  ///< standard deviation of the contaminated-row errors
};

/// Per-curve basis function v_j(t), 1-based j.
double sim_basis(int j, double t, bool contaminated);
/// True coefficient function beta_m(t), 0-based m.
double sim_beta(int m, double t);
/// Integral of v_j * beta_m over [0,1] by composite Simpson on 2000 intervals.
double sim_response_integral(int j, int m, bool contaminated);

SimDataset generate_clean(int n, std::uint64_t seed, const GeneratorOptions& options = {});

/// Replaces round(level n) uniformly chosen rows with curves from the
/// contaminated process and responses with errors of standard deviation
/// options.outlier_noise_sd (10 by default).
/// Throws InputError unless 0 < level < 0.5.
SimDataset contaminate(const SimDataset& clean, double level, std::uint64_t seed,
                       const GeneratorOptions& options = {});

/// Deterministic 64-bit seed derived from a master seed and stream labels.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

struct ExperimentConfig {
  std::vector<Method> methods{Method::FPC, Method::FPLS, Method::RFPLS};
  std::vector<double> contamination_levels{0.0, 0.01, 0.05, 0.10};
  int replications = 100;
  int n_train = 200;
  int n_test = 200;
  int num_basis = 20;
  int max_components = 8;
  int cv_folds = 5;
  double trim_alpha = 0.1;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_path;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// One tidy result cell. Missing values carry a NaN value and a reason.
struct ResultRow {
  int replication = 0;
  Method method = Method::FPLS;
  double level = 0.0;
  std::string metric;  ///< trimmed_mspe, trimmed_r2, risee, components, or error
  std::string target;  ///< test, beta1..beta3, h, or the failure reason
  double value = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
};

/// Runs every replication: n_train + n_test clean rows, the training part
/// contaminated per level, CV-selected components, test-set metrics and
/// RISEE. Rows come out ordered by (replication, level, method) whatever
/// the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Median of a metric over replications, NaN when nothing was recorded.
double median_metric(const ExperimentResult& result, Method method, double level,
                     const std::string& metric, const std::string& target);

}  // namespace rfpls
