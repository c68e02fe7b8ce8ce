#pragma once

#include <Eigen/Dense>

#include <span>

namespace rfpls {

/// Cutoffs of Hampel's three-part redescending function.
struct HampelConstants {
  double c1 = 1.65;
  double c2 = 1.96;
  double c3 = 3.09;
};

/// Tukey bisquare loss, saturating at 1 for |u| >= c.
double tukey_rho(double u, double c);

/// Bisquare score function u (1 - (u/c)^2)^2 on |u| <= c and 0 beyond.
/// Proportional to d rho / du with factor c^2 / 6.
double tukey_kappa(double u, double c);

double hampel_f(double x, const HampelConstants& k = {});

/// f(x)/x with value 1 at x = 0: one on [0, c1], zero beyond c3.
double hampel_weight(double x, const HampelConstants& k = {});

/// Median; for even sizes the midpoint of the two central order statistics.
double median(std::span<const double> values);
double median(const Eigen::VectorXd& values);

struct ScaleEstimate {
  double value = 0.0;
  bool degenerate = false;  ///< true when the scale is zero
};

/// Raw median absolute deviation, median_i |e_i - median_j e_j|,
/// with no consistency factor.
ScaleEstimate mad_scale(const Eigen::VectorXd& e);

/// Spatial (L1) median of the rows of `points` by Weiszfeld iteration
/// with the Vardi-Zhang modification at data points.
Eigen::VectorXd l1_median(const Eigen::MatrixXd& points);

/// Efficiency factor [sum kappa'(e_i)]^2 / (n sum kappa(e_i)^2) with the
/// derivative taken by central differences of half-width `step`.
/// Throws NumericalError when every kappa(e_i) vanishes.
double efficiency_factor(const Eigen::VectorXd& e, double c, double step);

/// Data-driven bisquare tuning constant: maximizes the efficiency factor
/// over c = 1.0, 1.1, ..., 10.0 on MAD-scaled least-squares residuals.
/// Ties go to the larger c. Throws DegenerateScaleError for a zero scale.
double select_tuning(const Eigen::MatrixXd& scores, const Eigen::VectorXd& y);

inline constexpr double kTuningMin = 1.0;
inline constexpr double kTuningMax = 10.0;
inline constexpr int kTuningGridSize = 91;

struct MEstimate {
  Eigen::VectorXd delta;    ///< slope coefficients on the scores
  double intercept = 0.0;
  double c = 0.0;
  double scale = 0.0;       ///< final MAD scale of the residuals
  int iterations = 0;
  bool converged = false;
  Eigen::VectorXd weights;  ///< final IRLS weights omega_i
};

struct MEstimateOptions {
  double tol = 1e-8;
  int max_iter = 100;
  /// Test hook: rho(u) = u^2, i.e. omega_i = 1, reducing to least squares.
  bool quadratic_loss = false;
};

/// Bisquare M-estimate of y = delta0 + scores * delta by iteratively
/// reweighted least squares started from least squares. The MAD scale of
/// the previous residuals is recomputed every iteration.
/// Throws NumericalError if the weighted normal equations become singular.
MEstimate m_estimate(const Eigen::MatrixXd& scores, const Eigen::VectorXd& y, double c,
                     const MEstimateOptions& options = {});

/// Ordinary least squares of y on [1, x]; returns (intercept, slopes...).
Eigen::VectorXd least_squares_with_intercept(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace rfpls
