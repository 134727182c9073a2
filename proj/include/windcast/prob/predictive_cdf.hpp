#pragma once

#include <variant>
#include <vector>

#include "windcast/prob/parametric.hpp"
#include "windcast/prob/quantile_set.hpp"

namespace windcast::prob {

/// Finite distribution on [0,1]: probability mass at each support point.
class DiscreteDistribution {
 public:
  /// Points are sorted and merged; probabilities are renormalized when their
  /// sum is within 1e-9 of one.
  DiscreteDistribution(std::vector<double> points, std::vector<double> probs);
  static DiscreteDistribution point_mass(double y);

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& probs() const { return probs_; }

  double cdf(double y) const;
  double cdf_left(double y) const;
  double quantile(double alpha) const;
  double mean() const;

 private:
  std::vector<double> points_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

using PredictiveCDF = std::variant<ParametricDensity, QuantileSet, DiscreteDistribution>;

/// P(Y <= y) for y in [0,1].
double cdf_eval(const PredictiveCDF& f, double y);
/// P(Y < y) for y in [0,1].
double cdf_left(const PredictiveCDF& f, double y);
/// Smallest y with cdf_eval(f, y) >= alpha, alpha in (0,1).
double cdf_inverse(const PredictiveCDF& f, double alpha);
double mean(const PredictiveCDF& f);

/// E[(Y - c)^+] and E[(c - Y)^+] for c in [0,1]. Closed form for every
/// representation except the logit-normal, which uses adaptive quadrature.
double expected_excess(const PredictiveCDF& f, double c);
double expected_shortfall(const PredictiveCDF& f, double c);

}  // namespace windcast::prob
