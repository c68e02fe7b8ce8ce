#pragma once

#include "rfpls/robust.hpp"
#include "rfpls/simpls.hpp"

#include <Eigen/Dense>

namespace rfpls {

/// Lower clip for observation weights so that the sqrt(r) score
/// correction never divides by zero.
inline constexpr double kWeightFloor = 1e-6;

/// Result of the iteratively reweighted PLS (partial robust M) loop.
struct RobustPLSFit {
  PLSFit pls;               ///< weighted SIMPLS fit at the final weights
  Eigen::VectorXd weights;  ///< r_i = r_i^e * r_i^a used by `pls`
  int iterations = 0;
  bool converged = false;

  const Eigen::MatrixXd& robust_weights() const { return pls.weights; }
  const Eigen::MatrixXd& scores() const { return pls.scores; }
  const Eigen::VectorXd& gamma() const { return pls.gamma; }
};

struct PRMOptions {
  double tol = 1e-2;
  int max_iter = 100;
  HampelConstants hampel{};
  /// Test hook: keep every observation weight at 1.
  bool unit_weights = false;
};

/// Residual weight r^e * leverage weight r^a for each row.
struct WeightParts {
  Eigen::VectorXd residual;
  Eigen::VectorXd leverage;
  Eigen::VectorXd combined;  ///< product, clipped to [kWeightFloor, 1]
};

/// Hampel weights of |e_i| / MAD(e) for residuals e.
/// Throws DegenerateScaleError when the MAD is zero.
Eigen::VectorXd residual_weights(const Eigen::VectorXd& residuals, const HampelConstants& k = {});

/// Hampel weights of ||x_i - L1med|| / median_i ||x_i - L1med|| over the rows of x.
/// Throws DegenerateScaleError when the median distance is zero.
Eigen::VectorXd leverage_weights(const Eigen::MatrixXd& x, const HampelConstants& k = {});

/// Starting weights: residuals y_i - median(y), leverage from the rows of A.
WeightParts initial_weights(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                            const HampelConstants& k = {});

/// Iteratively reweighted SIMPLS with h components. Stops when the relative
/// change of the score-regression coefficients falls below options.tol, or
/// after options.max_iter rounds with converged = false.
RobustPLSFit prm_fit(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, int h,
                     const PRMOptions& options = {});

}  // namespace rfpls
