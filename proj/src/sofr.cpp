#include "rfpls/sofr.hpp"

#include "rfpls/error.hpp"
#include "rfpls/simpls.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace rfpls {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::FPLS: return "fpls";
    case Method::RFPLS: return "rfpls";
    case Method::FPC: return "fpc";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "fpls") return Method::FPLS;
  if (lower == "rfpls") return Method::RFPLS;
  if (lower == "fpc") return Method::FPC;
  throw InputError("unknown method '" + std::string(name) + "' (expected fpls, rfpls or fpc)");
}

namespace {

void check_response(const MultiFunctionalDesign& design, const Eigen::VectorXd& y) {
  if (y.size() != design.num_observations()) {
    throw InputError("response has " + std::to_string(y.size()) + " entries, design has " +
                     std::to_string(design.num_observations()) + " observations");
  }
}

// Maps score-space coefficients back to basis coefficients and intercept.
void set_coefficients(FittedSofr& fit, const MultiFunctionalDesign& design,
                      const Eigen::MatrixXd& directions, const Eigen::VectorXd& coef,
                      const Eigen::VectorXd& x_center, double score_intercept) {
  const Eigen::VectorXd on_a = directions * coef;
  fit.beta = design.gram_inv_half().transpose() * on_a;
  fit.intercept = score_intercept - x_center.dot(on_a);
}

}  // namespace

FittedSofr fit_fpls(const MultiFunctionalDesign& design, const Eigen::VectorXd& y, int h) {
  check_response(design, y);
  const PLSFit pls = simpls_fit(design.transformed(), y, h);
  FittedSofr fit;
  fit.method = Method::FPLS;
  fit.systems = design.systems();
  fit.components = pls.components;
  set_coefficients(fit, design, pls.weights, pls.gamma, pls.x_center, pls.gamma0);
  fit.fitted = pls.fitted();
  return fit;
}

FittedSofr fit_rfpls(const MultiFunctionalDesign& design, const Eigen::VectorXd& y, int h,
                     const RobustFitOptions& options) {
  check_response(design, y);
  const RobustPLSFit prm = prm_fit(design.transformed(), y, h, options.prm);
  const Eigen::MatrixXd& scores = prm.scores();

  const double c = options.m.quadratic_loss ? kTuningMax : select_tuning(scores, y);
  const MEstimate est = m_estimate(scores, y, c, options.m);

  FittedSofr fit;
  fit.method = Method::RFPLS;
  fit.systems = design.systems();
  fit.components = prm.pls.components;
  set_coefficients(fit, design, prm.robust_weights(), est.delta, prm.pls.x_center, est.intercept);
  fit.fitted = Eigen::VectorXd::Constant(y.size(), est.intercept) + scores * est.delta;

  RobustReport report;
  report.weights = prm.weights;
  report.tuning = c;
  report.irpls_iterations = prm.iterations;
  report.irpls_converged = prm.converged;
  report.m_iterations = est.iterations;
  report.m_converged = est.converged;
  fit.robust = std::move(report);
  return fit;
}

FittedSofr fit_fpc(const MultiFunctionalDesign& design, const Eigen::VectorXd& y,
                   int num_components) {
  check_response(design, y);
  if (num_components < 1) throw InputError("number of principal components must be at least 1");
  const Eigen::MatrixXd& a = design.transformed();
  const Eigen::VectorXd x_center = a.colwise().mean().transpose();
  const double y_center = y.mean();
  const Eigen::MatrixXd centered = a.rowwise() - x_center.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  const Eigen::Index rank = (sv.array() > 1e-10 * top).count();
  if (num_components > rank || top == 0.0) {
    throw InputError("requested " + std::to_string(num_components) +
                     " principal components but the design has rank " + std::to_string(rank));
  }
  const Eigen::MatrixXd directions = svd.matrixV().leftCols(num_components);
  const Eigen::MatrixXd scores = centered * directions;
  const Eigen::VectorXd yc = (y.array() - y_center).matrix();
  // Scores are orthogonal with squared norms sv^2.
  const Eigen::VectorXd coef =
      (scores.transpose() * yc).cwiseQuotient(sv.head(num_components).cwiseAbs2());

  FittedSofr fit;
  fit.method = Method::FPC;
  fit.systems = design.systems();
  fit.components = num_components;
  set_coefficients(fit, design, directions, coef, x_center, y_center);
  fit.fitted = Eigen::VectorXd::Constant(y.size(), y_center) + scores * coef;
  return fit;
}

FittedSofr fit_method(Method method, const MultiFunctionalDesign& design, const Eigen::VectorXd& y,
                      int h) {
  switch (method) {
    case Method::FPLS: return fit_fpls(design, y, h);
    case Method::RFPLS: return fit_rfpls(design, y, h);
    case Method::FPC: return fit_fpc(design, y, h);
  }
  throw InputError("unknown method");
}

std::vector<Eigen::VectorXd> coefficient_functions(const FittedSofr& fit,
                                                   std::span<const std::vector<double>> grids) {
  if (grids.size() != fit.systems.size()) {
    throw InputError("expected " + std::to_string(fit.systems.size()) + " evaluation grids, got " +
                     std::to_string(grids.size()));
  }
  std::vector<Eigen::VectorXd> curves;
  Eigen::Index offset = 0;
  for (std::size_t m = 0; m < fit.systems.size(); ++m) {
    const BasisSystem& s = fit.systems[m];
    curves.push_back(evaluate_basis(s, grids[m]) * fit.beta.segment(offset, s.num_basis()));
    offset += s.num_basis();
  }
  return curves;
}

Eigen::VectorXd predict_coefficients(const FittedSofr& fit, const Eigen::MatrixXd& coefficients) {
  if (coefficients.cols() != fit.total_basis()) {
    throw InputError("coefficient matrix has " + std::to_string(coefficients.cols()) +
                     " columns, model expects " + std::to_string(fit.total_basis()));
  }
  const Eigen::VectorXd on_coefficients = block_gram(fit.systems) * fit.beta;
  return Eigen::VectorXd::Constant(coefficients.rows(), fit.intercept) + coefficients * on_coefficients;
}

Eigen::VectorXd predict(const FittedSofr& fit, std::span<const Eigen::MatrixXd> raw,
                        std::span<const std::vector<double>> grids) {
  if (raw.size() != fit.systems.size()) {
    throw InputError("model expects " + std::to_string(fit.systems.size()) +
                     " functional predictors, got " + std::to_string(raw.size()));
  }
  return predict_coefficients(fit, smooth_predictors(raw, grids, fit.systems));
}

Eigen::MatrixXd functional_pls_components(const MultiFunctionalDesign& design,
                                          const Eigen::VectorXd& y, int h) {
  check_response(design, y);
  if (h < 1) throw InputError("number of PLS components must be at least 1");
  const Eigen::MatrixXd& psi = design.gram();
  Eigen::MatrixXd residual = design.coefficients().rowwise() - design.coefficients().colwise().mean();
  Eigen::VectorXd response = (y.array() - y.mean()).matrix();

  const Eigen::VectorXd first_cross = residual.transpose() * response;
  Eigen::MatrixXd components(y.size(), 0);
  for (int comp = 0; comp < h; ++comp) {
    const Eigen::VectorXd cross = residual.transpose() * response;
    if (cross.norm() <= 1e-10 * first_cross.norm() || !(cross.norm() > 0.0)) break;
    // Leading eigenvector of cross cross^T Psi is cross itself; scale to
    // unit Psi-norm.
    const Eigen::VectorXd w = cross / std::sqrt(cross.dot(psi * cross));
    const Eigen::VectorXd xi = residual * (psi * w);
    const double xi_sq = xi.squaredNorm();
    if (!(xi_sq > 0.0)) break;
    const Eigen::VectorXd loading = residual.transpose() * xi / xi_sq;
    residual -= xi * loading.transpose();
    response -= (response.dot(xi) / xi_sq) * xi;
    components.conservativeResize(Eigen::NoChange, comp + 1);
    components.col(comp) = xi / std::sqrt(xi_sq);
  }
  return components;
}

}  // namespace rfpls
