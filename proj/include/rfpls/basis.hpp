#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace rfpls {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
  bool contains(double t, double slack = 0.0) const {
    return t >= lo - slack && t <= hi + slack;
  }
};

/// Clamped B-spline basis with equally spaced interior knots.
///
/// The full knot vector repeats each endpoint `order` times, so
/// num_basis = interior knots + order and every basis function
/// interpolates at the boundaries.
class BasisSystem {
 public:
  /// Throws InputError when num_basis < order, order < 2 or the domain
  /// is empty or inverted.
  static BasisSystem bspline(Interval domain, int num_basis, int order = 4);

  const Interval& domain() const { return domain_; }
  int num_basis() const { return num_basis_; }
  int order() const { return order_; }
  int num_interior_knots() const { return num_basis_ - order_; }
  const std::vector<double>& knots() const { return knots_; }
  /// Distinct knot values a = b_0 < b_1 < ... < b_L = b.
  std::vector<double> breakpoints() const;

  /// Values of all basis functions at `t` (length num_basis).
  Eigen::VectorXd evaluate(double t) const;

  friend bool operator==(const BasisSystem& a, const BasisSystem& b) {
    return a.domain_.lo == b.domain_.lo && a.domain_.hi == b.domain_.hi &&
           a.num_basis_ == b.num_basis_ && a.order_ == b.order_;
  }

 private:
  BasisSystem(Interval domain, int num_basis, int order, std::vector<double> knots)
      : domain_(domain), num_basis_(num_basis), order_(order), knots_(std::move(knots)) {}

  Interval domain_;
  int num_basis_;
  int order_;
  std::vector<double> knots_;
};

/// Basis matrix: row i holds psi_1(t_i) .. psi_K(t_i).
/// Throws InputError when a point lies outside the domain.
Eigen::MatrixXd evaluate_basis(const BasisSystem& system, std::span<const double> points);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
QuadratureRule gauss_legendre(int num_nodes);

/// Gram matrix of an arbitrary finite basis, integrated piecewise over
/// `breakpoints` with `nodes_per_piece` Gauss-Legendre nodes per piece.
Eigen::MatrixXd gram_matrix(const std::function<Eigen::VectorXd(double)>& basis,
                            int num_basis, std::span<const double> breakpoints,
                            int nodes_per_piece);

/// Inner products of the B-spline basis. Exact for piecewise polynomials:
/// uses `order` nodes per knot interval (degree 2*order-1 exactness).
Eigen::MatrixXd gram_matrix(const BasisSystem& system);

struct GramRoot {
  Eigen::MatrixXd half;      ///< symmetric R with R R^T = Psi
  Eigen::MatrixXd inv_half;  ///< pseudo-inverse of R
};

/// Symmetric square root via eigendecomposition. Eigenvalues are floored
/// at zero; those below 1e-12 * lambda_max are treated as zero when
/// inverting. Throws NumericalError if any eigenvalue is below
/// -1e-8 * lambda_max.
GramRoot sqrt_gram(const Eigen::MatrixXd& psi);

/// Least-squares basis coefficients of each row of `raw` (n x J) sampled
/// on `grid`. Throws InputError for a rank-deficient basis matrix.
Eigen::MatrixXd smooth_curves(const Eigen::MatrixXd& raw, std::span<const double> grid,
                              const BasisSystem& system);

/// Finite-dimensional representation of M functional predictors:
/// coefficients D, block Gram Psi, its root, and A = D Psi^{1/2}^T.
class MultiFunctionalDesign {
 public:
  /// Assembles a design from already smoothed coefficient blocks
  /// (columns ordered system by system).
  static MultiFunctionalDesign from_coefficients(Eigen::MatrixXd coefficients,
                                                 std::vector<BasisSystem> systems);

  const std::vector<BasisSystem>& systems() const { return systems_; }
  const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& gram_half() const { return gram_half_; }
  const Eigen::MatrixXd& gram_inv_half() const { return gram_inv_half_; }
  const Eigen::MatrixXd& transformed() const { return transformed_; }

  Eigen::Index num_observations() const { return coefficients_.rows(); }
  Eigen::Index total_basis() const { return coefficients_.cols(); }
  int num_predictors() const { return static_cast<int>(systems_.size()); }
  /// First column of predictor m's block.
  Eigen::Index block_offset(int m) const { return offsets_[static_cast<std::size_t>(m)]; }

  /// Same basis and Gram data restricted to the given rows.
  MultiFunctionalDesign subset(std::span<const Eigen::Index> rows) const;

 private:
  MultiFunctionalDesign() = default;

  std::vector<BasisSystem> systems_;
  std::vector<Eigen::Index> offsets_;
  Eigen::MatrixXd coefficients_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd gram_half_;
  Eigen::MatrixXd gram_inv_half_;
  Eigen::MatrixXd transformed_;
};

/// Smooths every predictor with its system and assembles the design.
/// Throws InputError when predictors disagree on the number of rows.
MultiFunctionalDesign build_design(std::span<const Eigen::MatrixXd> raw,
                                   std::span<const std::vector<double>> grids,
                                   std::vector<BasisSystem> systems);

/// Smoothed coefficients for new curves, aligned with `systems`.
Eigen::MatrixXd smooth_predictors(std::span<const Eigen::MatrixXd> raw,
                                  std::span<const std::vector<double>> grids,
                                  const std::vector<BasisSystem>& systems);

/// Block-diagonal Gram matrix of a list of systems.
Eigen::MatrixXd block_gram(const std::vector<BasisSystem>& systems);

}  // namespace rfpls
