#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rfpls/error.hpp"
#include "rfpls/simpls.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>

using namespace rfpls;
using doctest::Approx;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXd drop_row(const Eigen::MatrixXd& m, Eigen::Index k) {
  Eigen::MatrixXd out(m.rows() - 1, m.cols());
  out.topRows(k) = m.topRows(k);
  out.bottomRows(m.rows() - k - 1) = m.bottomRows(m.rows() - k - 1);
  return out;
}

}  // namespace

TEST_CASE("single column: one component is the simple regression line") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd a = testing::random_matrix(30, 1, rng);
  const Eigen::VectorXd y = 3.0 * a.col(0) + testing::random_vector(30, rng);
  const PLSFit fit = simpls_fit(a, y, 1);
  CHECK(fit.components == 1);
  CHECK(max_abs(fit.fitted() - testing::ls_fitted(a, y)) < 1e-10);
}

TEST_CASE("full-rank fit with h = p reproduces least squares") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 25 + rep, p = 2 + rep % 5;
    const Eigen::MatrixXd a = testing::random_matrix(n, p, rng);
    const Eigen::VectorXd y = testing::random_vector(n, rng);
    const PLSFit fit = simpls_fit(a, y, p);
    CHECK(fit.components == p);
    CHECK(max_abs(fit.fitted() - testing::ls_fitted(a, y)) < 1e-8);

    const Eigen::MatrixXd a_new = testing::random_matrix(7, p, rng);
    const Eigen::VectorXd b = testing::normal_equations_ls(a, y);
    const Eigen::VectorXd expect = (a_new * b.tail(p)).array() + b(0);
    CHECK(max_abs(pls_predict(fit, a_new) - expect) < 1e-8);
  }
}

TEST_CASE("constant response gives zero score coefficients") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = testing::random_matrix(20, 4, rng);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 2.5);
  const PLSFit fit = simpls_fit(a, y, 2);
  CHECK(max_abs(fit.gamma) == 0.0);
  CHECK(fit.gamma0 == Approx(2.5));
  CHECK(max_abs(fit.fitted().array() - 2.5) < 1e-14);
}

TEST_CASE("score properties") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd a = testing::random_matrix(40, 12, rng);
    const Eigen::VectorXd y = a.col(0) - 2 * a.col(3) + testing::random_vector(40, rng);
    const PLSFit fit = simpls_fit(a, y, 5);
    REQUIRE(fit.components == 5);
    const Eigen::MatrixXd gram = fit.scores.transpose() * fit.scores;
    CHECK(max_abs(gram - Eigen::MatrixXd::Identity(5, 5)) < 1e-8);
    CHECK(max_abs(fit.scores.colwise().sum()) < 1e-10);
    const Eigen::MatrixXd centered = a.rowwise() - fit.x_center.transpose();
    CHECK(max_abs(centered * fit.weights - fit.scores) < 1e-12);
    CHECK(fit.gamma0 == Approx(y.mean()));
    CHECK(max_abs(fit.gamma - fit.scores.transpose() * (y.array() - y.mean()).matrix()) < 1e-10);
    CHECK(max_abs(pls_predict(fit, a) - fit.fitted()) < 1e-12);
  }
}

TEST_CASE("components are nested") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd a = testing::random_matrix(30, 8, rng);
  const Eigen::VectorXd y = testing::random_vector(30, rng);
  const PLSFit one = simpls_fit(a, y, 1);
  const PLSFit three = simpls_fit(a, y, 3);
  CHECK(max_abs(one.weights.col(0) - three.weights.col(0)) < 1e-12);
  CHECK(max_abs(one.scores.col(0) - three.scores.col(0)) < 1e-12);
}

TEST_CASE("prediction at the centroid is the mean response") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd a = testing::random_matrix(25, 6, rng);
  const Eigen::VectorXd y = testing::random_vector(25, rng);
  const PLSFit fit = simpls_fit(a, y, 3);
  const Eigen::MatrixXd centroid = fit.x_center.transpose().replicate(4, 1);
  CHECK(max_abs(pls_predict(fit, centroid).array() - y.mean()) < 1e-12);
}

TEST_CASE("rank exhaustion truncates the fit") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd a = testing::random_matrix(30, 2, rng) * testing::random_matrix(2, 6, rng);
  const Eigen::VectorXd y = testing::random_vector(30, rng);
  const PLSFit fit = simpls_fit(a, y, 5);
  CHECK(fit.components == 2);
  CHECK(fit.rank_exhausted);
  CHECK(fit.weights.cols() == 2);
  CHECK(max_abs(fit.fitted() - testing::ls_fitted(a.leftCols(2), y)) < 1e-8);
}

TEST_CASE("components are limited by n - 1 and p") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd a = testing::random_matrix(5, 10, rng);
  const Eigen::VectorXd y = testing::random_vector(5, rng);
  const PLSFit fit = simpls_fit(a, y, 8);
  CHECK(fit.components <= 4);
  CHECK(max_abs(fit.fitted() - y) < 1e-8);
}

TEST_CASE("unit weights reproduce the unweighted fit") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd a = testing::random_matrix(35, 9, rng);
    const Eigen::VectorXd y = testing::random_vector(35, rng);
    const PLSFit plain = simpls_fit(a, y, 4);
    const PLSFit weighted = weighted_simpls_fit(a, y, Eigen::VectorXd::Ones(35), 4);
    CHECK(max_abs(plain.weights - weighted.weights) < 1e-12);
    CHECK(max_abs(plain.scores - weighted.scores) < 1e-12);
    CHECK(max_abs(plain.gamma - weighted.gamma) < 1e-12);
    CHECK(std::abs(plain.gamma0 - weighted.gamma0) < 1e-12);
  }
}

TEST_CASE("a zero weight removes the observation") {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = 30, k = rep;
    const Eigen::MatrixXd a = testing::random_matrix(n, 7, rng);
    Eigen::VectorXd y = testing::random_vector(n, rng);
    y(k) += 50.0;
    Eigen::VectorXd r = Eigen::VectorXd::Ones(n);
    r(k) = 0.0;
    const PLSFit weighted = weighted_simpls_fit(a, y, r, 3);
    const Eigen::MatrixXd a_loo = drop_row(a, k);
    const Eigen::VectorXd y_loo = drop_row(y, k);
    const PLSFit loo = simpls_fit(a_loo, y_loo, 3);
    CHECK(max_abs(weighted.coefficients() - loo.coefficients()) < 1e-8);
    CHECK(std::abs(weighted.gamma0 - loo.gamma0) < 1e-8);
    CHECK(max_abs(pls_predict(weighted, a) - pls_predict(loo, a)) < 1e-8);
  }
}

TEST_CASE("duplicating an observation equals doubling its weight") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = 25, k = 2 * rep;
    const Eigen::MatrixXd a = testing::random_matrix(n, 6, rng);
    const Eigen::VectorXd y = testing::random_vector(n, rng);
    Eigen::MatrixXd a_dup(n + 1, 6);
    a_dup << a, a.row(k);
    Eigen::VectorXd y_dup(n + 1);
    y_dup << y, y(k);
    // Halving every weight is a common rescaling and leaves the fit unchanged.
    Eigen::VectorXd r = Eigen::VectorXd::Constant(n, 0.5);
    r(k) = 1.0;
    const PLSFit dup = simpls_fit(a_dup, y_dup, 3);
    const PLSFit weighted = weighted_simpls_fit(a, y, r, 3);
    CHECK(max_abs(dup.coefficients() - weighted.coefficients()) < 1e-8);
    CHECK(std::abs(dup.gamma0 - weighted.gamma0) < 1e-8);
  }
}

TEST_CASE("weighted scores are corrected scores") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd a = testing::random_matrix(20, 5, rng);
  const Eigen::VectorXd y = testing::random_vector(20, rng);
  Eigen::VectorXd r(20);
  for (int i = 0; i < 20; ++i) r(i) = 0.1 + 0.045 * i;
  const PLSFit fit = weighted_simpls_fit(a, y, r, 3);
  const Eigen::MatrixXd centered = a.rowwise() - fit.x_center.transpose();
  CHECK(max_abs(centered * fit.weights - fit.scores) < 1e-12);
  const Eigen::MatrixXd weighted_scores = r.cwiseSqrt().asDiagonal() * fit.scores;
  CHECK(max_abs(weighted_scores.transpose() * weighted_scores - Eigen::MatrixXd::Identity(3, 3)) < 1e-10);
  const Eigen::VectorXd wmean = (a.transpose() * r) / r.sum();
  CHECK(max_abs(fit.x_center - wmean) < 1e-12);
  CHECK(fit.y_center == Approx(r.dot(y) / r.sum()));
}

TEST_CASE("invalid inputs") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd a = testing::random_matrix(10, 3, rng);
  const Eigen::VectorXd y = testing::random_vector(10, rng);
  CHECK_THROWS_AS(simpls_fit(a, y, 0), InputError);
  CHECK_THROWS_AS(simpls_fit(a, testing::random_vector(9, rng), 1), InputError);
  CHECK_THROWS_AS(simpls_fit(a.topRows(1), y.head(1), 1), InputError);
  Eigen::MatrixXd bad = a;
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(simpls_fit(bad, y, 1), InputError);
  Eigen::VectorXd r = Eigen::VectorXd::Ones(10);
  r(2) = -0.5;
  CHECK_THROWS_AS(weighted_simpls_fit(a, y, r, 1), InputError);
  Eigen::VectorXd lonely = Eigen::VectorXd::Zero(10);
  lonely(0) = 1.0;
  CHECK_THROWS_AS(weighted_simpls_fit(a, y, lonely, 1), InputError);
  const PLSFit fit = simpls_fit(a, y, 2);
  CHECK_THROWS_AS(pls_predict(fit, testing::random_matrix(2, 4, rng)), InputError);
}
