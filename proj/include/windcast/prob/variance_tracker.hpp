#pragma once

#include <cstddef>
#include <vector>

namespace windcast::prob {

/// Exponentially smoothed error variance per cell (e.g. per site and lead).
class VarianceTracker {
 public:
  static constexpr double kFloor = 1e-8;

  /// `smoothing` in (0,1]; 1 freezes the initial variance.
  VarianceTracker(std::size_t cells, double smoothing, double initial_variance);

  /// v <- smoothing * v + (1 - smoothing) * error^2, floored.
  void update(std::size_t cell, double error);
  double variance(std::size_t cell) const { return variance_.at(cell); }
  std::size_t cells() const { return variance_.size(); }
  double smoothing() const { return smoothing_; }

 private:
  double smoothing_;
  std::vector<double> variance_;
};

}  // namespace windcast::prob
