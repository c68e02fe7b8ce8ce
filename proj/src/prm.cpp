#include "rfpls/prm.hpp"

#include "rfpls/error.hpp"

#include <optional>
#include <string>

namespace rfpls {

Eigen::VectorXd residual_weights(const Eigen::VectorXd& residuals, const HampelConstants& k) {
  const ScaleEstimate scale = mad_scale(residuals);
  if (scale.degenerate) {
    throw DegenerateScaleError("residual MAD scale is zero; more than half of the residuals coincide");
  }
  Eigen::VectorXd w(residuals.size());
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    w(i) = hampel_weight(std::abs(residuals(i)) / scale.value, k);
  }
  return w;
}

Eigen::VectorXd leverage_weights(const Eigen::MatrixXd& x, const HampelConstants& k) {
  const Eigen::VectorXd center = l1_median(x);
  const Eigen::VectorXd distance = (x.rowwise() - center.transpose()).rowwise().norm();
  const double typical = median(distance);
  if (!(typical > 0.0)) {
    throw DegenerateScaleError("median distance to the L1 median is zero");
  }
  Eigen::VectorXd w(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) w(i) = hampel_weight(distance(i) / typical, k);
  return w;
}

namespace {

Eigen::VectorXd combine(const Eigen::VectorXd& residual, const Eigen::VectorXd& leverage) {
  return residual.cwiseProduct(leverage).cwiseMax(kWeightFloor).cwiseMin(1.0);
}

}  // namespace

WeightParts initial_weights(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                            const HampelConstants& k) {
  if (a.rows() < 3) throw InputError("robust PLS needs at least three observations");
  if (y.size() != a.rows()) throw InputError("response length does not match design rows");
  WeightParts parts;
  const double center = median(y);
  parts.residual = residual_weights((y.array() - center).matrix(), k);
  parts.leverage = leverage_weights(a, k);
  parts.combined = combine(parts.residual, parts.leverage);
  return parts;
}

RobustPLSFit prm_fit(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, int h,
                     const PRMOptions& options) {
  if (h < 1) throw InputError("number of PLS components must be at least 1");
  if (a.rows() <= h + 1) {
    throw InputError("robust PLS with " + std::to_string(h) + " components needs more than " +
                     std::to_string(h + 1) + " observations");
  }

  Eigen::VectorXd r = options.unit_weights ? Eigen::VectorXd::Ones(a.rows())
                                           : initial_weights(a, y, options.hampel).combined;
  RobustPLSFit out;
  std::optional<Eigen::VectorXd> previous_gamma;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    PLSFit fit = weighted_simpls_fit(a, y, r, h);
    out.iterations = iter;

    bool done = false;
    if (previous_gamma && previous_gamma->size() == fit.gamma.size()) {
      const double denom = previous_gamma->norm();
      const double change = (fit.gamma - *previous_gamma).norm() / (denom > 0.0 ? denom : 1.0);
      done = change < options.tol;
    }
    previous_gamma = fit.gamma;
    out.pls = std::move(fit);
    out.weights = r;
    if (done) {
      out.converged = true;
      break;
    }

    if (!options.unit_weights) {
      const Eigen::VectorXd residuals = y - out.pls.fitted();
      r = combine(residual_weights(residuals, options.hampel),
                  leverage_weights(out.pls.scores, options.hampel));
      if ((r.array() > kWeightFloor).count() < 2) {
        throw NumericalError("robust PLS breakdown: fewer than two observations keep positive weight");
      }
    }
  }
  return out;
}

}  // namespace rfpls
