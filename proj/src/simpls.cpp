#include "rfpls/simpls.hpp"

#include "rfpls/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace rfpls {

namespace {

void check_inputs(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, int h) {
  if (h < 1) throw InputError("number of PLS components must be at least 1");
  if (a.rows() < 2) throw InputError("PLS needs at least two observations");
  if (y.size() != a.rows()) {
    throw InputError("response has " + std::to_string(y.size()) + " entries, design has " +
                     std::to_string(a.rows()) + " rows");
  }
  if (!a.allFinite() || !y.allFinite()) throw InputError("PLS inputs must be finite");
}

}  // namespace

Eigen::VectorXd PLSFit::fitted() const {
  return Eigen::VectorXd::Constant(scores.rows(), gamma0) + scores * gamma;
}

Eigen::VectorXd PLSFit::coefficients() const { return weights * gamma; }

PLSFit weighted_simpls_fit(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& r, int h) {
  check_inputs(a, y, h);
  if (r.size() != a.rows()) throw InputError("weight vector length does not match design rows");
  if ((r.array() < 0.0).any() || !r.allFinite()) throw InputError("PLS weights must be finite and nonnegative");
  if ((r.array() > 0.0).count() < 2) throw InputError("weighted PLS needs at least two positive weights");

  const Eigen::Index n = a.rows();
  const Eigen::Index p = a.cols();
  const double total = r.sum();

  PLSFit fit;
  fit.x_center = (a.transpose() * r) / total;
  fit.y_center = r.dot(y) / total;
  fit.gamma0 = fit.y_center;

  const Eigen::ArrayXd root = r.array().sqrt();
  const Eigen::MatrixXd centered = a.rowwise() - fit.x_center.transpose();
  const Eigen::MatrixXd xs = root.matrix().asDiagonal() * centered;
  const Eigen::VectorXd ys = (root * (y.array() - fit.y_center)).matrix();

  const int max_components = static_cast<int>(std::min<Eigen::Index>(h, std::min(n - 1, p)));
  Eigen::VectorXd s = xs.transpose() * ys;
  const double s_initial = s.norm();
  const double zero_tol = 1e-14 * xs.norm() * ys.norm();

  std::vector<Eigen::VectorXd> weights;
  std::vector<double> loadings_y;
  Eigen::MatrixXd basis(p, 0);  // orthonormal x-loadings
  for (int comp = 0; comp < max_components; ++comp) {
    const double s_norm = s.norm();
    if (s_norm <= zero_tol || s_norm <= 1e-10 * s_initial) break;
    Eigen::VectorXd w = s;
    Eigen::VectorXd t = xs * w;
    const double t_norm = t.norm();
    if (!(t_norm > 0.0)) break;
    t /= t_norm;
    w /= t_norm;

    Eigen::VectorXd v = xs.transpose() * t;
    // Two Gram-Schmidt passes against earlier loadings.
    for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass) {
      v -= basis * (basis.transpose() * v);
    }
    const double v_norm = v.norm();
    if (!(v_norm > 0.0)) break;
    v /= v_norm;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v;
    s -= v * v.dot(s);

    weights.push_back(std::move(w));
    loadings_y.push_back(ys.dot(t));
  }

  fit.components = static_cast<int>(weights.size());
  fit.rank_exhausted = fit.components < h;
  fit.weights.resize(p, fit.components);
  fit.gamma.resize(fit.components);
  for (int c = 0; c < fit.components; ++c) {
    fit.weights.col(c) = weights[static_cast<std::size_t>(c)];
    fit.gamma(c) = loadings_y[static_cast<std::size_t>(c)];
  }
  fit.scores = centered * fit.weights;
  return fit;
}

PLSFit simpls_fit(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, int h) {
  return weighted_simpls_fit(a, y, Eigen::VectorXd::Ones(a.rows()), h);
}

Eigen::VectorXd pls_predict(const PLSFit& fit, const Eigen::MatrixXd& a_new) {
  if (a_new.cols() != fit.x_center.size()) {
    throw InputError("prediction design has " + std::to_string(a_new.cols()) + " columns, fit expects " +
                     std::to_string(fit.x_center.size()));
  }
  const Eigen::MatrixXd scores = (a_new.rowwise() - fit.x_center.transpose()) * fit.weights;
  return Eigen::VectorXd::Constant(a_new.rows(), fit.gamma0) + scores * fit.gamma;
}

}  // namespace rfpls
