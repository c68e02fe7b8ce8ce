#pragma once

#include "rfpls/basis.hpp"
#include "rfpls/sofr.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rfpls {

/// Number of largest squared errors discarded: ceil(alpha * n).
Eigen::Index trimmed_count(Eigen::Index n, double alpha);

/// Mean of the squared errors left after discarding the ceil(alpha n)
/// largest ones.
double trimmed_mspe(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double alpha);

/// 1 - mean over the kept set of (y_i - yhat_i)^2 / (y_i - ybar*)^2, where
/// the kept set follows trimmed_mspe and ybar* is the mean of y over it.
/// Observations with y_i == ybar* are left out of the average.
/// Throws NumericalError if every kept observation equals ybar*.
double trimmed_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double alpha);

/// Relative integrated squared error ||beta - beta_hat||^2 / ||beta||^2 by
/// the left Riemann sum on `grid`.
double risee(std::span<const double> grid, const Eigen::VectorXd& beta_true,
             const Eigen::VectorXd& beta_hat);

struct CVReport {
  std::vector<int> grid;         ///< h = 1..H_max
  std::vector<double> scores;    ///< pooled trimmed MSPE per h (inf if no fold could be fit)
  std::vector<int> skipped;      ///< number of skipped folds per h
  int chosen_h = 1;
  int folds = 0;
  double alpha = 0.0;
};

/// k-fold cross-validated trimmed MSPE over h = 1..max_components. Each
/// fold's squared errors are trimmed separately and the kept ones pooled.
/// Folds come from a seeded permutation. A (h, fold) cell whose training
/// part has too few rows, or whose fit fails, is skipped and counted.
CVReport select_num_components(const MultiFunctionalDesign& design, const Eigen::VectorXd& y,
                               int max_components, int folds, double alpha, Method method,
                               std::uint64_t seed);

/// Indices of values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]; quartiles by
/// linear interpolation of order statistics.
std::vector<Eigen::Index> iqr_outliers(const Eigen::VectorXd& y);

/// Quantile by linear interpolation between order statistics (type 7).
double quantile(const Eigen::VectorXd& values, double prob);

}  // namespace rfpls
