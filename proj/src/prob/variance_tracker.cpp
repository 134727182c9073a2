#include "windcast/prob/variance_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace windcast::prob {

VarianceTracker::VarianceTracker(std::size_t cells, double smoothing, double initial_variance)
    : smoothing_(smoothing), variance_(cells, std::max(initial_variance, kFloor)) {
  if (!(smoothing > 0.0 && smoothing <= 1.0))
    throw std::invalid_argument("variance smoothing must lie in (0,1]");
  if (!(initial_variance >= 0.0)) throw std::invalid_argument("initial variance must be >= 0");
}

void VarianceTracker::update(std::size_t cell, double error) {
  if (!std::isfinite(error)) throw std::invalid_argument("non-finite forecast error");
  double& v = variance_.at(cell);
  v = std::max(smoothing_ * v + (1.0 - smoothing_) * error * error, kFloor);
}

}  // namespace windcast::prob
