#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace windcast::point {

struct LinearFit {
  Eigen::VectorXd coefficients;
  double sigma = 0.0;  // residual sd with n - p degrees of freedom
  double rmse = 0.0;   // in-sample
  std::size_t rows = 0;
};

/// (Weighted) ordinary least squares. Rows with zero weight are ignored.
/// Throws DataError("too few rows") below `min_rows` usable rows and
/// NumericError("rank-deficient design") for collinear columns.
LinearFit least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& weights = {}, std::size_t min_rows = 0);

struct RlsResult {
  Eigen::VectorXd coefficients;
  std::vector<Eigen::VectorXd> history;  // estimate after each processed row
};

/// Recursive least squares minimizing sum_t lambda^(T-1-t) w_t (y_t - x_t b)^2,
/// started from the weighted batch solution on the first `initial_window`
/// rows. With lambda = 1 the final estimate equals batch OLS.
RlsResult recursive_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double lambda, std::size_t initial_window,
                                  const Eigen::VectorXd& weights = {});

}  // namespace windcast::point
