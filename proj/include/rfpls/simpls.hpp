#pragma once

#include <Eigen/Dense>

namespace rfpls {

/// Univariate-response PLS fit produced by SIMPLS.
///
/// `weights` maps centered predictors directly to scores, so
/// scores = (A - 1 x_center^T) * weights. Weight columns are scaled so
/// that the scores of the (weighted) fitting data have unit norm.
struct PLSFit {
  Eigen::MatrixXd weights;   ///< p x h
  Eigen::MatrixXd scores;    ///< n x h, corrected (unweighted) scores
  Eigen::VectorXd gamma;     ///< h score-regression coefficients
  double gamma0 = 0.0;       ///< intercept of the score regression
  Eigen::VectorXd x_center;  ///< p column centers
  double y_center = 0.0;
  int components = 0;        ///< extracted components (may be below requested)
  bool rank_exhausted = false;

  /// Training predictions gamma0 + scores * gamma.
  Eigen::VectorXd fitted() const;
  /// Coefficient vector on centered predictors: weights * gamma.
  Eigen::VectorXd coefficients() const;
};

/// SIMPLS of y on A with h components. If the deflated cross-covariance
/// vanishes first, returns a truncated fit with rank_exhausted set.
PLSFit simpls_fit(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, int h);

/// SIMPLS applied to sqrt(r_i)-scaled rows after weighted-mean centering.
/// Returned scores are the corrected ones, (A_i - x_center) * weights, which
/// equal the weighted-data scores divided by sqrt(r_i) whenever r_i > 0.
PLSFit weighted_simpls_fit(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& r, int h);

Eigen::VectorXd pls_predict(const PLSFit& fit, const Eigen::MatrixXd& a_new);

}  // namespace rfpls
