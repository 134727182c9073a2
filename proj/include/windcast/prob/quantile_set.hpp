#pragma once

#include <vector>

namespace windcast::prob {

/// Nonparametric predictive CDF defined by quantiles at nominal levels.
///
/// Between the outermost quantiles the CDF interpolates linearly. Outside,
/// exponential tails run to cdf(0) = 0 and cdf(1) = 1, with rates chosen so
/// the tail density meets the slope of the outermost interior segment.
/// A quantile sitting on a bound turns the remaining tail into a point mass.
class QuantileSet {
 public:
  /// Levels must be strictly increasing in (0,1); values are clipped to
  /// [0,1] and sorted (rearrangement) when they cross.
  QuantileSet(std::vector<double> levels, std::vector<double> values);

  const std::vector<double>& levels() const { return levels_; }
  const std::vector<double>& values() const { return values_; }
  double lower_rate() const { return lower_rate_; }
  double upper_rate() const { return upper_rate_; }
  /// True when the input quantiles crossed and had to be sorted.
  bool rearranged() const { return rearranged_; }

  double cdf(double y) const;
  double cdf_left(double y) const;
  /// Closed-form generalized inverse.
  double quantile(double alpha) const;
  /// Integral of cdf over [0, x], exact for the linear pieces and tails.
  double cdf_integral(double x) const;

 private:
  double lower_tail(double y) const;
  double upper_tail(double y) const;
  double interior(std::size_t j, double y) const;

  std::vector<double> levels_;
  std::vector<double> values_;
  double lower_rate_ = 0.0;
  double upper_rate_ = 0.0;
  bool rearranged_ = false;
};

/// Sorts quantile values so they are nondecreasing in level.
std::vector<double> rearrange(std::vector<double> values);

/// Exponential tail shape g(u) = (e^{ru} - 1) / (e^r - 1), linear at r = 0.
double tail_shape(double u, double rate);
double tail_shape_inverse(double p, double rate);
/// Integral of tail_shape(u, rate) over [0, u].
double tail_shape_integral(double u, double rate);

}  // namespace windcast::prob
