#pragma once

#include <span>

namespace windcast::point {

/// Logistic speed-to-power conversion g(w) = 1 / (1 + exp(-(w - midpoint) / width)).
struct LogisticCurve {
  double midpoint = 10.0;  // m/s
  double width = 1.5;      // m/s

  double operator()(double speed) const;
};

/// Least-squares fit of the logistic curve to (forecast speed, observed power)
/// pairs: coarse grid search followed by damped Gauss-Newton refinement.
LogisticCurve fit_logistic(std::span<const double> speeds, std::span<const double> powers);

}  // namespace windcast::point
