#pragma once

// Independent reference computations shared by the test binaries.

#include "rfpls/basis.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  return random_matrix(n, 1, rng).col(0);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return g;
}

/// Least squares of y on [1, x] through the normal equations.
inline Eigen::VectorXd normal_equations_ls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Eigen::MatrixXd xtx = design.transpose() * design;
  return xtx.ldlt().solve(design.transpose() * y);
}

inline Eigen::VectorXd ls_fitted(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd b = normal_equations_ls(x, y);
  return (x * b.tail(x.cols())).array() + b(0);
}

/// Textbook recursive Cox-de Boor value of B_{i,order}(t); the last
/// non-empty span is closed on the right so t = b evaluates correctly.
inline double cox_de_boor(const std::vector<double>& knots, int i, int order, double t) {
  const auto k = [&](int j) { return knots[static_cast<std::size_t>(j)]; };
  if (order == 1) {
    const double last = knots.back();
    if (t == last) return (k(i) < t && k(i + 1) == last) ? 1.0 : 0.0;
    return (k(i) <= t && t < k(i + 1)) ? 1.0 : 0.0;
  }
  double value = 0.0;
  const double left = k(i + order - 1) - k(i);
  const double right = k(i + order) - k(i + 1);
  if (left > 0.0) value += (t - k(i)) / left * cox_de_boor(knots, i, order - 1, t);
  if (right > 0.0) value += (k(i + order) - t) / right * cox_de_boor(knots, i + 1, order - 1, t);
  return value;
}

/// Composite Simpson rule with `intervals` (even) sub-intervals.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int intervals) {
  const double h = (hi - lo) / intervals;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * h);
  return sum * h / 3.0;
}

/// Design of M predictors from random smooth coefficients.
inline rfpls::MultiFunctionalDesign random_design(int n, const std::vector<int>& sizes, std::mt19937_64& rng) {
  std::vector<rfpls::BasisSystem> systems;
  int total = 0;
  for (int k : sizes) {
    systems.push_back(rfpls::BasisSystem::bspline({0.0, 1.0}, k));
    total += k;
  }
  return rfpls::MultiFunctionalDesign::from_coefficients(random_matrix(n, total, rng), systems);
}

}  // namespace testing
