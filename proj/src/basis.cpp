#include "rfpls/basis.hpp"

#include "rfpls/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rfpls {

namespace {

double domain_slack(const Interval& d) { return 1e-12 * std::max(1.0, d.length()); }

// Knot span index i with knots[i] <= t < knots[i+1], restricted to the
// valid range [order-1, num_basis-1].
int find_span(const std::vector<double>& knots, int num_basis, int order, double t) {
  const int last = num_basis - 1;
  if (t >= knots[static_cast<std::size_t>(last + 1)]) return last;
  const auto first = knots.begin() + (order - 1);
  const auto end = knots.begin() + (last + 2);
  auto it = std::upper_bound(first, end, t);
  return std::clamp(static_cast<int>(it - knots.begin()) - 1, order - 1, last);
}

}  // namespace

BasisSystem BasisSystem::bspline(Interval domain, int num_basis, int order) {
  if (!(std::isfinite(domain.lo) && std::isfinite(domain.hi)) || !(domain.hi > domain.lo)) {
    throw InputError("basis domain must be a nonempty interval [a,b] with a < b");
  }
  if (order < 2) throw InputError("spline order must be at least 2");
  if (num_basis < order) {
    throw InputError("num_basis (" + std::to_string(num_basis) +
                     ") must be at least the spline order (" + std::to_string(order) + ")");
  }
  const int interior = num_basis - order;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(num_basis + order));
  knots.insert(knots.end(), static_cast<std::size_t>(order), domain.lo);
  for (int k = 1; k <= interior; ++k) {
    knots.push_back(domain.lo + domain.length() * k / (interior + 1));
  }
  knots.insert(knots.end(), static_cast<std::size_t>(order), domain.hi);
  return BasisSystem(domain, num_basis, order, std::move(knots));
}

std::vector<double> BasisSystem::breakpoints() const {
  std::vector<double> b(knots_.begin() + (order_ - 1), knots_.end() - (order_ - 1));
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

Eigen::VectorXd BasisSystem::evaluate(double t) const {
  if (!domain_.contains(t, domain_slack(domain_))) {
    throw InputError("evaluation point " + std::to_string(t) + " outside basis domain [" +
                     std::to_string(domain_.lo) + ", " + std::to_string(domain_.hi) + "]");
  }
  t = std::clamp(t, domain_.lo, domain_.hi);
  const int degree = order_ - 1;
  const int span = find_span(knots_, num_basis_, order_, t);

  // Nonzero basis functions on the span (triangular scheme).
  std::vector<double> left(static_cast<std::size_t>(order_)), right(static_cast<std::size_t>(order_));
  std::vector<double> n(static_cast<std::size_t>(order_), 0.0);
  n[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[static_cast<std::size_t>(j)] = t - knots_[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots_[static_cast<std::size_t>(span + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = n[static_cast<std::size_t>(r)] / denom;
      n[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    n[static_cast<std::size_t>(j)] = saved;
  }

  Eigen::VectorXd values = Eigen::VectorXd::Zero(num_basis_);
  for (int r = 0; r <= degree; ++r) values(span - degree + r) = n[static_cast<std::size_t>(r)];
  return values;
}

Eigen::MatrixXd evaluate_basis(const BasisSystem& system, std::span<const double> points) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), system.num_basis());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = system.evaluate(points[i]).transpose();
  }
  return out;
}

QuadratureRule gauss_legendre(int num_nodes) {
  if (num_nodes < 1) throw InputError("quadrature needs at least one node");
  QuadratureRule rule{Eigen::VectorXd(num_nodes), Eigen::VectorXd(num_nodes)};
  const int n = num_nodes;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes(i) = x;
    rule.weights(i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Eigen::MatrixXd gram_matrix(const std::function<Eigen::VectorXd(double)>& basis,
                            int num_basis, std::span<const double> breakpoints,
                            int nodes_per_piece) {
  const QuadratureRule rule = gauss_legendre(nodes_per_piece);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(num_basis, num_basis);
  for (std::size_t piece = 0; piece + 1 < breakpoints.size(); ++piece) {
    const double a = breakpoints[piece];
    const double b = breakpoints[piece + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
      const Eigen::VectorXd v = basis(mid + half * rule.nodes(q));
      gram.selfadjointView<Eigen::Lower>().rankUpdate(v, half * rule.weights(q));
    }
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  return gram;
}

Eigen::MatrixXd gram_matrix(const BasisSystem& system) {
  const std::vector<double> breaks = system.breakpoints();
  return gram_matrix([&system](double t) { return system.evaluate(t); }, system.num_basis(),
                     breaks, system.order() + 1);
}

GramRoot sqrt_gram(const Eigen::MatrixXd& psi) {
  if (psi.rows() != psi.cols()) throw InputError("Gram matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(psi);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of Gram matrix failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.size() > 0 ? lambda.maxCoeff() : 0.0;
  if (lambda.size() > 0 && lambda.minCoeff() < -1e-8 * std::abs(lambda_max)) {
    throw NumericalError("Gram matrix is not positive semidefinite");
  }
  Eigen::VectorXd root(lambda.size());
  Eigen::VectorXd inv_root(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double l = std::max(lambda(i), 0.0);
    root(i) = std::sqrt(l);
    inv_root(i) = l > 1e-12 * lambda_max ? 1.0 / root(i) : 0.0;
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  GramRoot out;
  out.half = v * root.asDiagonal() * v.transpose();
  out.inv_half = v * inv_root.asDiagonal() * v.transpose();
  // Exact symmetry.
  out.half = 0.5 * (out.half + out.half.transpose()).eval();
  out.inv_half = 0.5 * (out.inv_half + out.inv_half.transpose()).eval();
  return out;
}

Eigen::MatrixXd smooth_curves(const Eigen::MatrixXd& raw, std::span<const double> grid,
                              const BasisSystem& system) {
  const auto num_points = static_cast<Eigen::Index>(grid.size());
  if (raw.cols() != num_points) {
    throw InputError("curve matrix has " + std::to_string(raw.cols()) + " columns but grid has " +
                     std::to_string(num_points) + " points");
  }
  if (num_points < system.num_basis()) {
    throw InputError("smoothing needs at least as many grid points (" + std::to_string(num_points) +
                     ") as basis functions (" + std::to_string(system.num_basis()) + ")");
  }
  const Eigen::MatrixXd basis = evaluate_basis(system, grid);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  if (qr.rank() < system.num_basis()) {
    throw InputError("basis evaluation matrix is rank deficient on the given grid");
  }
  return qr.solve(raw.transpose()).transpose();
}

Eigen::MatrixXd block_gram(const std::vector<BasisSystem>& systems) {
  Eigen::Index total = 0;
  for (const auto& s : systems) total += s.num_basis();
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(total, total);
  Eigen::Index offset = 0;
  for (const auto& s : systems) {
    psi.block(offset, offset, s.num_basis(), s.num_basis()) = gram_matrix(s);
    offset += s.num_basis();
  }
  return psi;
}

MultiFunctionalDesign MultiFunctionalDesign::from_coefficients(Eigen::MatrixXd coefficients,
                                                               std::vector<BasisSystem> systems) {
  if (systems.empty()) throw InputError("design needs at least one functional predictor");
  MultiFunctionalDesign d;
  Eigen::Index total = 0;
  for (const auto& s : systems) {
    d.offsets_.push_back(total);
    total += s.num_basis();
  }
  if (coefficients.cols() != total) {
    throw InputError("coefficient matrix has " + std::to_string(coefficients.cols()) +
                     " columns, basis systems need " + std::to_string(total));
  }
  d.gram_ = Eigen::MatrixXd::Zero(total, total);
  d.gram_half_ = Eigen::MatrixXd::Zero(total, total);
  d.gram_inv_half_ = Eigen::MatrixXd::Zero(total, total);
  for (std::size_t m = 0; m < systems.size(); ++m) {
    const Eigen::Index off = d.offsets_[m];
    const Eigen::Index k = systems[m].num_basis();
    const Eigen::MatrixXd block = gram_matrix(systems[m]);
    const GramRoot root = sqrt_gram(block);
    d.gram_.block(off, off, k, k) = block;
    d.gram_half_.block(off, off, k, k) = root.half;
    d.gram_inv_half_.block(off, off, k, k) = root.inv_half;
  }
  d.transformed_ = coefficients * d.gram_half_.transpose();
  d.coefficients_ = std::move(coefficients);
  d.systems_ = std::move(systems);
  return d;
}

MultiFunctionalDesign MultiFunctionalDesign::subset(std::span<const Eigen::Index> rows) const {
  MultiFunctionalDesign d = *this;
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.coefficients_.resize(n, coefficients_.cols());
  d.transformed_.resize(n, transformed_.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= coefficients_.rows()) throw InputError("design subset row out of range");
    d.coefficients_.row(i) = coefficients_.row(r);
    d.transformed_.row(i) = transformed_.row(r);
  }
  return d;
}

Eigen::MatrixXd smooth_predictors(std::span<const Eigen::MatrixXd> raw,
                                  std::span<const std::vector<double>> grids,
                                  const std::vector<BasisSystem>& systems) {
  if (raw.size() != systems.size() || grids.size() != systems.size()) {
    throw InputError("expected " + std::to_string(systems.size()) + " functional predictors, got " +
                     std::to_string(raw.size()));
  }
  const Eigen::Index n = raw.front().rows();
  Eigen::Index total = 0;
  for (std::size_t m = 0; m < raw.size(); ++m) {
    if (raw[m].rows() != n) {
      throw InputError("predictor " + std::to_string(m + 1) + " has " +
                       std::to_string(raw[m].rows()) + " rows, expected " + std::to_string(n));
    }
    total += systems[m].num_basis();
  }
  Eigen::MatrixXd coefficients(n, total);
  Eigen::Index offset = 0;
  for (std::size_t m = 0; m < raw.size(); ++m) {
    const Eigen::Index k = systems[m].num_basis();
    coefficients.middleCols(offset, k) = smooth_curves(raw[m], grids[m], systems[m]);
    offset += k;
  }
  return coefficients;
}

MultiFunctionalDesign build_design(std::span<const Eigen::MatrixXd> raw,
                                   std::span<const std::vector<double>> grids,
                                   std::vector<BasisSystem> systems) {
  if (raw.empty()) throw InputError("design needs at least one functional predictor");
  Eigen::MatrixXd coefficients = smooth_predictors(raw, grids, systems);
  return MultiFunctionalDesign::from_coefficients(std::move(coefficients), std::move(systems));
}

}  // namespace rfpls
