#include "rfpls/eval.hpp"

#include "rfpls/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace rfpls {

namespace {

void check_pair(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double alpha) {
  if (y.size() != yhat.size()) {
    throw InputError("observed and predicted vectors differ in length (" + std::to_string(y.size()) +
                     " vs " + std::to_string(yhat.size()) + ")");
  }
  if (y.size() < 1) throw InputError("need at least one observation");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InputError("trim fraction must lie in [0, 1)");
}

// Indices of the kept observations: all but the ceil(alpha n) largest
// squared errors. Stable on ties so the choice is deterministic.
std::vector<Eigen::Index> kept_indices(const Eigen::VectorXd& sq, double alpha) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(sq.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&sq](Eigen::Index a, Eigen::Index b) { return sq(a) < sq(b); });
  order.resize(static_cast<std::size_t>(sq.size() - trimmed_count(sq.size(), alpha)));
  return order;
}

}  // namespace

Eigen::Index trimmed_count(Eigen::Index n, double alpha) {
  // The small offset keeps e.g. 0.1 * 30 from rounding up to 4.
  const auto drop = static_cast<Eigen::Index>(std::ceil(alpha * static_cast<double>(n) - 1e-9));
  return std::clamp<Eigen::Index>(drop, 0, std::max<Eigen::Index>(n - 1, 0));
}

double trimmed_mspe(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double alpha) {
  check_pair(y, yhat, alpha);
  const Eigen::VectorXd sq = (y - yhat).array().square().matrix();
  const auto kept = kept_indices(sq, alpha);
  double total = 0.0;
  for (Eigen::Index i : kept) total += sq(i);
  return total / static_cast<double>(kept.size());
}

double trimmed_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, double alpha) {
  check_pair(y, yhat, alpha);
  const Eigen::VectorXd sq = (y - yhat).array().square().matrix();
  const auto kept = kept_indices(sq, alpha);
  double mean = 0.0;
  for (Eigen::Index i : kept) mean += y(i);
  mean /= static_cast<double>(kept.size());

  double ratio_sum = 0.0;
  int used = 0;
  for (Eigen::Index i : kept) {
    const double dev = y(i) - mean;
    if (dev == 0.0) continue;
    ratio_sum += sq(i) / (dev * dev);
    ++used;
  }
  if (used == 0) throw NumericalError("trimmed R^2 undefined: every kept observation equals the trimmed mean");
  return 1.0 - ratio_sum / used;
}

double risee(std::span<const double> grid, const Eigen::VectorXd& beta_true,
             const Eigen::VectorXd& beta_hat) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (n < 2) throw InputError("RISEE needs at least two grid points");
  if (beta_true.size() != n || beta_hat.size() != n) throw InputError("curves must be sampled on the grid");
  double err = 0.0;
  double norm = 0.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double dt = grid[static_cast<std::size_t>(j + 1)] - grid[static_cast<std::size_t>(j)];
    const double d = beta_true(j) - beta_hat(j);
    err += d * d * dt;
    norm += beta_true(j) * beta_true(j) * dt;
  }
  if (!(norm > 0.0)) throw InputError("RISEE undefined for a zero true coefficient function");
  return err / norm;
}

CVReport select_num_components(const MultiFunctionalDesign& design, const Eigen::VectorXd& y,
                               int max_components, int folds, double alpha, Method method,
                               std::uint64_t seed) {
  const Eigen::Index n = design.num_observations();
  if (y.size() != n) throw InputError("response length does not match design rows");
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (max_components < 1) throw InputError("maximum number of components must be at least 1");
  if (n < 2 * folds) {
    throw InputError("cross-validation with " + std::to_string(folds) + " folds needs at least " +
                     std::to_string(2 * folds) + " observations");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<Eigen::Index>> test(static_cast<std::size_t>(folds));
  std::vector<std::vector<Eigen::Index>> train(static_cast<std::size_t>(folds));
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto fold = pos % static_cast<std::size_t>(folds);
    for (std::size_t k = 0; k < test.size(); ++k) {
      (k == fold ? test[k] : train[k]).push_back(order[pos]);
    }
  }

  CVReport report;
  report.folds = folds;
  report.alpha = alpha;
  for (int h = 1; h <= max_components; ++h) {
    double kept_sum = 0.0;
    Eigen::Index kept_count = 0;
    int skipped = 0;
    for (std::size_t k = 0; k < test.size(); ++k) {
      const auto train_n = static_cast<int>(train[k].size());
      if (train_n <= h + 1) {
        ++skipped;
        continue;
      }
      Eigen::VectorXd y_train(train_n);
      for (int i = 0; i < train_n; ++i) y_train(i) = y(train[k][static_cast<std::size_t>(i)]);
      const MultiFunctionalDesign fold_design = design.subset(train[k]);
      Eigen::VectorXd pred;
      try {
        const FittedSofr fit = fit_method(method, fold_design, y_train, h);
        const MultiFunctionalDesign held_out = design.subset(test[k]);
        pred = predict_coefficients(fit, held_out.coefficients());
      } catch (const Error&) {
        ++skipped;
        continue;
      }
      Eigen::VectorXd y_test(static_cast<Eigen::Index>(test[k].size()));
      for (std::size_t i = 0; i < test[k].size(); ++i) y_test(static_cast<Eigen::Index>(i)) = y(test[k][i]);
      const Eigen::VectorXd sq = (y_test - pred).array().square().matrix();
      for (Eigen::Index i : kept_indices(sq, alpha)) {
        kept_sum += sq(i);
        ++kept_count;
      }
    }
    report.grid.push_back(h);
    report.skipped.push_back(skipped);
    report.scores.push_back(kept_count > 0 ? kept_sum / static_cast<double>(kept_count)
                                           : std::numeric_limits<double>::infinity());
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < report.scores.size(); ++i) {
    if (report.scores[i] < report.scores[best]) best = i;
  }
  if (!std::isfinite(report.scores[best])) {
    throw NumericalError("cross-validation failed: no fold could be fit for any number of components");
  }
  report.chosen_h = report.grid[best];
  return report;
}

double quantile(const Eigen::VectorXd& values, double prob) {
  if (values.size() < 1) throw InputError("quantile of an empty vector");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const double pos = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

std::vector<Eigen::Index> iqr_outliers(const Eigen::VectorXd& y) {
  if (y.size() < 4) throw InputError("IQR outlier rule needs at least four values");
  const double q1 = quantile(y, 0.25);
  const double q3 = quantile(y, 0.75);
  const double iqr = q3 - q1;
  const double lower = q1 - 1.5 * iqr;
  const double upper = q3 + 1.5 * iqr;
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) < lower || y(i) > upper) out.push_back(i);
  }
  return out;
}

}  // namespace rfpls
