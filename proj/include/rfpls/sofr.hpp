#pragma once

#include "rfpls/basis.hpp"
#include "rfpls/prm.hpp"
#include "rfpls/robust.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfpls {

enum class Method { FPLS, RFPLS, FPC };

std::string_view method_name(Method m);
/// Parses "fpls", "rfpls" or "fpc" (case-insensitive). Throws InputError.
Method parse_method(std::string_view name);

struct RobustReport {
  Eigen::VectorXd weights;  ///< final IRPLS observation weights
  double tuning = 0.0;      ///< selected bisquare constant c
  int irpls_iterations = 0;
  bool irpls_converged = false;
  int m_iterations = 0;
  bool m_converged = false;
};

/// Fitted scalar-on-function model. Predictions are
/// intercept + D_new * Psi * beta for smoothed curve coefficients D_new.
struct FittedSofr {
  Method method = Method::FPLS;
  std::vector<BasisSystem> systems;
  Eigen::VectorXd beta;       ///< basis coefficients, blocks ordered by predictor
  double intercept = 0.0;
  int components = 0;
  std::optional<RobustReport> robust;
  Eigen::VectorXd fitted;     ///< training fitted values via the score path

  Eigen::Index total_basis() const { return beta.size(); }
};

struct RobustFitOptions {
  PRMOptions prm{};
  MEstimateOptions m{};
};

FittedSofr fit_fpls(const MultiFunctionalDesign& design, const Eigen::VectorXd& y, int h);

/// IRPLS components, data-driven bisquare tuning, then the M-estimate of
/// the score regression.
FittedSofr fit_rfpls(const MultiFunctionalDesign& design, const Eigen::VectorXd& y, int h,
                     const RobustFitOptions& options = {});

/// Least squares on the leading principal components of A (PCA in the
/// Psi metric of the coefficients). Throws InputError when
/// num_components exceeds the numerical rank.
FittedSofr fit_fpc(const MultiFunctionalDesign& design, const Eigen::VectorXd& y,
                   int num_components);

FittedSofr fit_method(Method method, const MultiFunctionalDesign& design, const Eigen::VectorXd& y,
                      int h);

/// beta_m(t) sampled on grids[m] for every predictor.
std::vector<Eigen::VectorXd> coefficient_functions(const FittedSofr& fit,
                                                   std::span<const std::vector<double>> grids);

/// Prediction from already smoothed coefficients (n x sum K_m).
Eigen::VectorXd predict_coefficients(const FittedSofr& fit, const Eigen::MatrixXd& coefficients);

/// Smooths raw curves with the stored systems and predicts.
Eigen::VectorXd predict(const FittedSofr& fit, std::span<const Eigen::MatrixXd> raw,
                        std::span<const std::vector<double>> grids);

/// Components of the functional formulation: Psi-metric weight functions
/// from the deflated coefficient cross-covariance, with the coefficient
/// matrix deflated component by component. Columns are scaled to unit norm.
Eigen::MatrixXd functional_pls_components(const MultiFunctionalDesign& design,
                                          const Eigen::VectorXd& y, int h);

}  // namespace rfpls
