#include "windcast/prob/quantile_regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "windcast/core/error.hpp"

namespace windcast::prob {

namespace {

Eigen::VectorXd row_weights(Eigen::Index rows, double forgetting) {
  Eigen::VectorXd w(rows);
  double v = 1.0;
  for (Eigen::Index t = rows - 1; t >= 0; --t) {
    w(t) = v;
    v *= forgetting;
  }
  return w;
}

Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w) {
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd xw = sw.asDiagonal() * x;
  Eigen::VectorXd yw = sw.cwiseProduct(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  if (qr.rank() < x.cols()) throw NumericError("rank-deficient quantile regression design");
  return qr.solve(yw);
}

// Normal equations; the design rank is checked once by the initial solve.
Eigen::VectorXd normal_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& w) {
  const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtw * x);
  if (ldlt.info() != Eigen::Success) throw NumericError("quantile regression normal equations failed");
  return ldlt.solve(xtw * y);
}

}  // namespace

double check_loss(double u, double alpha) { return u * (alpha - (u < 0.0 ? 1.0 : 0.0)); }

double weighted_check_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& coefficients, double alpha, double forgetting) {
  const Eigen::VectorXd w = row_weights(x.rows(), forgetting);
  const Eigen::VectorXd u = y - x * coefficients;
  double loss = 0.0;
  for (Eigen::Index t = 0; t < u.size(); ++t) loss += w(t) * check_loss(u(t), alpha);
  return loss;
}

QrFit fit_quantile_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                              const QrOptions& options, const Eigen::VectorXd* start) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
  if (x.rows() != y.size()) throw std::invalid_argument("design and response differ in length");
  if (!(options.forgetting > 0.0 && options.forgetting <= 1.0))
    throw std::invalid_argument("quantile forgetting must lie in (0,1]");
  if (x.rows() <= x.cols()) throw DataError("too few rows for quantile regression");

  const Eigen::VectorXd base = row_weights(x.rows(), options.forgetting);
  QrFit fit;
  if (start) {
    if (start->size() != x.cols()) throw std::invalid_argument("start vector length mismatch");
    fit.coefficients = *start;
  } else {
    fit.coefficients = weighted_solve(x, y, base);
  }
  Eigen::VectorXd w(x.rows());
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::ArrayXd u = (y - x * fit.coefficients).array();
    const Eigen::ArrayXd side = (u >= 0.0).select(Eigen::ArrayXd::Constant(u.size(), alpha),
                                                  Eigen::ArrayXd::Constant(u.size(), 1.0 - alpha));
    w = base.array() * side / u.abs().max(options.smoothing);
    Eigen::VectorXd next = normal_solve(x, y, w);
    const double change = (next - fit.coefficients).cwiseAbs().maxCoeff();
    fit.coefficients = std::move(next);
    fit.iterations = it;
    if (change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

AdaptiveQuantileRegression::AdaptiveQuantileRegression(std::vector<double> levels,
                                                       std::vector<Eigen::VectorXd> coefficients,
                                                       std::vector<bool> converged)
    : levels_(std::move(levels)),
      coefficients_(std::move(coefficients)),
      converged_(std::move(converged)) {
  if (levels_.size() != coefficients_.size() || levels_.size() != converged_.size())
    throw std::invalid_argument("one coefficient vector per level required");
}

bool AdaptiveQuantileRegression::converged() const {
  return std::all_of(converged_.begin(), converged_.end(), [](bool c) { return c; });
}

std::vector<double> AdaptiveQuantileRegression::raw(const Eigen::VectorXd& features) const {
  std::vector<double> q;
  q.reserve(levels_.size());
  for (const auto& b : coefficients_) {
    if (b.size() != features.size()) throw std::invalid_argument("feature length mismatch");
    q.push_back(b.dot(features));
  }
  return q;
}

QuantileSet AdaptiveQuantileRegression::predict(const Eigen::VectorXd& features) const {
  return QuantileSet(levels_, raw(features));
}

AdaptiveQuantileRegression fit_adaptive_qr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                           const std::vector<double>& levels,
                                           const QrOptions& options) {
  if (levels.empty()) throw std::invalid_argument("no quantile levels");
  if (x.rows() < 50) throw DataError("quantile regression needs at least 50 rows per level");
  std::vector<Eigen::VectorXd> coefs;
  std::vector<bool> converged;
  for (double a : levels) {
    // Neighbouring levels start from the previous solution; the first solve
    // checks the design rank.
    auto fit = fit_quantile_regression(x, y, a, options, coefs.empty() ? nullptr : &coefs.back());
    coefs.push_back(std::move(fit.coefficients));
    converged.push_back(fit.converged);
  }
  return AdaptiveQuantileRegression(levels, std::move(coefs), std::move(converged));
}

}  // namespace windcast::prob
