#pragma once

#include <vector>

#include <Eigen/Dense>

#include "windcast/prob/quantile_set.hpp"

namespace windcast::prob {

/// rho_alpha(u) = u (alpha - 1{u < 0}).
double check_loss(double u, double alpha);

struct QrOptions {
  double forgetting = 1.0;  // row weight lambda^(T-1-t)
  double smoothing = 1e-4;
  double tolerance = 1e-8;
  int max_iterations = 200;
};

struct QrFit {
  Eigen::VectorXd coefficients;
  int iterations = 0;
  bool converged = false;
};

/// Linear alpha-quantile model minimizing the exponentially weighted check
/// loss, solved by IRLS on the smoothed check function. Non-convergence is
/// reported through `converged` with the last iterate returned. Without
/// `start` the iteration begins at the weighted least-squares solution.
QrFit fit_quantile_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                              const QrOptions& options = {},
                              const Eigen::VectorXd* start = nullptr);

/// Weighted check loss sum_t w_t rho(y_t - x_t b) with the same weights as the fit.
double weighted_check_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& coefficients, double alpha, double forgetting);

/// One linear quantile model per nominal level, sharing the design.
class AdaptiveQuantileRegression {
 public:
  AdaptiveQuantileRegression() = default;
  AdaptiveQuantileRegression(std::vector<double> levels, std::vector<Eigen::VectorXd> coefficients,
                             std::vector<bool> converged);

  const std::vector<double>& levels() const { return levels_; }
  const std::vector<Eigen::VectorXd>& coefficients() const { return coefficients_; }
  bool converged() const;

  /// Raw per-level quantiles for one feature row (may cross).
  std::vector<double> raw(const Eigen::VectorXd& features) const;
  /// Clipped and rearranged quantile set.
  QuantileSet predict(const Eigen::VectorXd& features) const;

 private:
  std::vector<double> levels_;
  std::vector<Eigen::VectorXd> coefficients_;
  std::vector<bool> converged_;
};

/// Fits every level independently. Requires >= 50 rows.
AdaptiveQuantileRegression fit_adaptive_qr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                           const std::vector<double>& levels,
                                           const QrOptions& options = {});

}  // namespace windcast::prob
