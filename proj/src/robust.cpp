#include "rfpls/robust.hpp"

#include "rfpls/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace rfpls {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

// A residual scale this small relative to the response is an exact fit.
bool negligible_scale(double scale, const Eigen::VectorXd& y) {
  const double reference = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
  return scale <= 1e-12 * reference;
}

}  // namespace

double tukey_rho(double u, double c) {
  if (std::abs(u) >= c) return 1.0;
  const double z = u / c;
  const double t = 1.0 - z * z;
  return 1.0 - t * t * t;
}

double tukey_kappa(double u, double c) {
  if (std::abs(u) > c) return 0.0;
  const double z = u / c;
  const double t = 1.0 - z * z;
  return u * t * t;
}

double hampel_f(double x, const HampelConstants& k) {
  const double ax = std::abs(x);
  const double sign = x < 0.0 ? -1.0 : 1.0;
  if (ax <= k.c1) return x;
  if (ax <= k.c2) return k.c1 * sign;
  if (ax <= k.c3) return k.c1 * (k.c3 - ax) / (k.c3 - k.c2) * sign;
  return 0.0;
}

double hampel_weight(double x, const HampelConstants& k) {
  if (x == 0.0) return 1.0;
  return hampel_f(x, k) / x;
}

double median(std::span<const double> values) {
  if (values.empty()) throw InputError("median of an empty set");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double median(const Eigen::VectorXd& values) {
  return median(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

ScaleEstimate mad_scale(const Eigen::VectorXd& e) {
  if (e.size() < 2) throw InputError("MAD scale needs at least two values");
  const double center = median(e);
  const Eigen::VectorXd deviations = (e.array() - center).abs().matrix();
  ScaleEstimate s;
  s.value = median(deviations);
  s.degenerate = !(s.value > 0.0);
  return s;
}

Eigen::VectorXd l1_median(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  if (n < 1) throw InputError("L1 median needs at least one point");
  if (n == 1) return points.row(0).transpose();

  Eigen::VectorXd y(dim);
  for (Eigen::Index j = 0; j < dim; ++j) y(j) = median(Eigen::VectorXd(points.col(j)));

  const double spread = (points.rowwise() - y.transpose()).rowwise().norm().maxCoeff();
  if (!(spread > 0.0)) return y;
  const double coincide = 1e-12 * spread;

  for (int iter = 0; iter < 500; ++iter) {
    Eigen::VectorXd weighted_sum = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd pull = Eigen::VectorXd::Zero(dim);
    double weight_total = 0.0;
    int at_point = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd diff = points.row(i).transpose() - y;
      const double d = diff.norm();
      if (d <= coincide) {
        ++at_point;
        continue;
      }
      weighted_sum += points.row(i).transpose() / d;
      pull += diff / d;
      weight_total += 1.0 / d;
    }
    if (weight_total == 0.0) break;  // every point coincides with y
    const Eigen::VectorXd target = weighted_sum / weight_total;
    Eigen::VectorXd next;
    if (at_point == 0) {
      next = target;
    } else {
      // y sits on a data point: move only if the pull of the others
      // outweighs the point's own mass.
      const double pull_norm = pull.norm();
      if (pull_norm <= at_point) break;
      const double g = at_point / pull_norm;
      next = (1.0 - g) * target + g * y;
    }
    const double step = (next - y).norm();
    y = next;
    if (step < 1e-8 * spread) break;
  }
  return y;
}

double efficiency_factor(const Eigen::VectorXd& e, double c, double step) {
  if (e.size() < 2) throw InputError("efficiency factor needs at least two residuals");
  if (!(step > 0.0)) throw InputError("finite-difference step must be positive");
  double slope_sum = 0.0;
  double kappa_sq = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    slope_sum += (tukey_kappa(e(i) + step, c) - tukey_kappa(e(i) - step, c)) / (2.0 * step);
    const double k = tukey_kappa(e(i), c);
    kappa_sq += k * k;
  }
  if (!(kappa_sq > 0.0)) {
    throw NumericalError("efficiency factor undefined: every residual lies beyond the tuning constant");
  }
  return slope_sum * slope_sum / (static_cast<double>(e.size()) * kappa_sq);
}

Eigen::VectorXd least_squares_with_intercept(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd design = with_intercept(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) throw NumericalError("least-squares design is rank deficient");
  return qr.solve(y);
}

double select_tuning(const Eigen::MatrixXd& scores, const Eigen::VectorXd& y) {
  if (scores.rows() <= scores.cols()) {
    throw InputError("tuning selection needs more observations than components");
  }
  const Eigen::VectorXd theta = least_squares_with_intercept(scores, y);
  const Eigen::VectorXd residuals = y - with_intercept(scores) * theta;
  const ScaleEstimate scale = mad_scale(residuals);
  if (scale.degenerate || negligible_scale(scale.value, y)) {
    throw DegenerateScaleError("residual MAD scale is zero; cannot select the bisquare tuning constant");
  }
  const Eigen::VectorXd scaled = residuals / scale.value;
  // Step of 1e-4 S_n on the raw residual scale.
  constexpr double step = 1e-4;

  double best_c = kTuningMin;
  double best_tau = -1.0;
  for (int k = 0; k < kTuningGridSize; ++k) {
    const double c = kTuningMin + 0.1 * k;
    double tau = 0.0;
    try {
      tau = efficiency_factor(scaled, c, step);
    } catch (const NumericalError&) {
      continue;
    }
    if (tau >= best_tau) {
      best_tau = tau;
      best_c = c;
    }
  }
  return best_c;
}

MEstimate m_estimate(const Eigen::MatrixXd& scores, const Eigen::VectorXd& y, double c,
                     const MEstimateOptions& options) {
  const Eigen::Index n = scores.rows();
  if (y.size() != n) throw InputError("response length does not match score rows");
  if (n <= scores.cols() + 1) throw InputError("M-estimation needs n > h + 1 observations");
  if (!(c > 0.0)) throw InputError("bisquare tuning constant must be positive");

  const Eigen::MatrixXd design = with_intercept(scores);
  Eigen::VectorXd theta = least_squares_with_intercept(scores, y);

  MEstimate out;
  out.c = c;
  out.weights = Eigen::VectorXd::Ones(n);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd residuals = y - design * theta;
    const ScaleEstimate scale = mad_scale(residuals);
    out.scale = scale.value;
    if (scale.degenerate || negligible_scale(scale.value, y)) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd omega = Eigen::VectorXd::Ones(n);
    if (!options.quadratic_loss) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = residuals(i) / scale.value;
        omega(i) = u == 0.0 ? 1.0 : tukey_kappa(u, c) / u;
      }
    }

    const Eigen::VectorXd root = omega.cwiseSqrt();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(root.asDiagonal() * design);
    if (qr.rank() < design.cols()) {
      throw NumericalError("M-estimation breakdown: weighted normal equations are singular (" +
                           std::to_string((omega.array() > 0.0).count()) + " nonzero weights)");
    }
    const Eigen::VectorXd next = qr.solve(root.asDiagonal() * y);
    const double denom = theta.norm();
    const double change = (next - theta).norm() / (denom > 0.0 ? denom : 1.0);
    theta = next;
    out.weights = omega;
    if (change < options.tol) {
      out.converged = true;
      break;
    }
  }
  out.intercept = theta(0);
  out.delta = theta.tail(scores.cols());
  return out;
}

}  // namespace rfpls
