#include "windcast/point/least_squares.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/error.hpp"

namespace windcast::point {

LinearFit least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& weights, std::size_t min_rows) {
  if (x.rows() != y.size()) throw std::invalid_argument("design and response differ in length");
  if (weights.size() != 0 && weights.size() != y.size())
    throw std::invalid_argument("weights differ in length from response");
  const Eigen::Index p = x.cols();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index t = 0; t < x.rows(); ++t)
    if (weights.size() == 0 || weights(t) > 0.0) keep.push_back(t);
  const auto n = static_cast<Eigen::Index>(keep.size());
  if (n <= p || static_cast<std::size_t>(n) < min_rows)
    throw DataError(fmt::format("too few rows: {} usable for {} parameters", n, p));

  Eigen::MatrixXd xw(n, p);
  Eigen::VectorXd yw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = weights.size() == 0 ? 1.0 : std::sqrt(weights(keep[static_cast<std::size_t>(i)]));
    xw.row(i) = s * x.row(keep[static_cast<std::size_t>(i)]);
    yw(i) = s * y(keep[static_cast<std::size_t>(i)]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) throw NumericError("rank-deficient design");

  LinearFit fit;
  fit.coefficients = qr.solve(yw);
  fit.rows = static_cast<std::size_t>(n);
  double rss = 0.0, wsum = 0.0;
  for (auto t : keep) {
    const double w = weights.size() == 0 ? 1.0 : weights(t);
    const double r = y(t) - x.row(t).dot(fit.coefficients);
    rss += w * r * r;
    wsum += w;
  }
  fit.rmse = std::sqrt(rss / wsum);
  fit.sigma = std::sqrt(rss / wsum * static_cast<double>(n) / static_cast<double>(n - p));
  return fit;
}

RlsResult recursive_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double lambda, std::size_t initial_window,
                                  const Eigen::VectorXd& weights) {
  if (!(lambda > 0.9 && lambda <= 1.0))
    throw std::invalid_argument("forgetting factor must lie in (0.9, 1]");
  const Eigen::Index p = x.cols();
  const auto n0 = static_cast<Eigen::Index>(initial_window);
  if (n0 < p) throw std::invalid_argument("initial window shorter than the parameter count");
  if (n0 > x.rows()) throw DataError("initial window longer than the data");
  auto weight = [&](Eigen::Index t) { return weights.size() == 0 ? 1.0 : weights(t); };

  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  for (Eigen::Index t = 0; t < n0; ++t) {
    const double w = std::pow(lambda, static_cast<double>(n0 - 1 - t)) * weight(t);
    info += w * x.row(t).transpose() * x.row(t);
    rhs += w * y(t) * x.row(t).transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (lu.rank() < p) throw NumericError("rank-deficient design");
  Eigen::MatrixXd cov = lu.inverse();
  RlsResult out;
  Eigen::VectorXd theta = cov * rhs;
  out.history.assign(static_cast<std::size_t>(n0), theta);

  for (Eigen::Index t = n0; t < x.rows(); ++t) {
    const double w = weight(t);
    if (w <= 0.0) {
      cov /= lambda;
    } else {
      const Eigen::VectorXd xt = x.row(t).transpose();
      const Eigen::VectorXd px = cov * xt;
      const double denom = lambda / w + xt.dot(px);
      const Eigen::VectorXd gain = px / denom;
      theta += gain * (y(t) - xt.dot(theta));
      cov = (cov - gain * px.transpose()) / lambda;
      cov = 0.5 * (cov + cov.transpose()).eval();
    }
    out.history.push_back(theta);
  }
  out.coefficients = theta;
  return out;
}

}  // namespace windcast::point
