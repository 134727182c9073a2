#include "windcast/prob/predictive_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace windcast::prob {

namespace {

void check_y(double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("cdf argument outside [0,1]");
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> points, std::vector<double> probs) {
  if (points.empty() || points.size() != probs.size())
    throw std::invalid_argument("discrete distribution needs matching nonempty points and probs");
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return points[a] < points[b]; });
  double total = 0.0;
  for (auto i : order) {
    if (!(points[i] >= 0.0 && points[i] <= 1.0))
      throw std::invalid_argument("discrete support outside [0,1]");
    if (!(probs[i] >= 0.0)) throw std::invalid_argument("negative probability");
    total += probs[i];
    if (!points_.empty() && points_.back() == points[i]) {
      probs_.back() += probs[i];
    } else {
      points_.push_back(points[i]);
      probs_.push_back(probs[i]);
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
  for (auto& p : probs_) p /= total;
  cumulative_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

DiscreteDistribution DiscreteDistribution::point_mass(double y) { return {{y}, {1.0}}; }

double DiscreteDistribution::cdf(double y) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), y);
  if (it == points_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - points_.begin()) - 1];
}

double DiscreteDistribution::cdf_left(double y) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), y);
  if (it == points_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - points_.begin()) - 1];
}

double DiscreteDistribution::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), alpha);
  if (it == cumulative_.end()) return points_.back();
  return points_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) m += points_[i] * probs_[i];
  return m;
}

double cdf_eval(const PredictiveCDF& f, double y) {
  check_y(y);
  return std::visit([y](const auto& d) { return d.cdf(y); }, f);
}

double cdf_left(const PredictiveCDF& f, double y) {
  check_y(y);
  return std::visit([y](const auto& d) { return d.cdf_left(y); }, f);
}

double cdf_inverse(const PredictiveCDF& f, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
  return std::visit([alpha](const auto& d) { return d.quantile(alpha); }, f);
}

double mean(const PredictiveCDF& f) {
  if (auto* p = std::get_if<ParametricDensity>(&f)) return p->mean();
  if (auto* d = std::get_if<DiscreteDistribution>(&f)) return d->mean();
  return 1.0 - std::get<QuantileSet>(f).cdf_integral(1.0);
}

double expected_excess(const PredictiveCDF& f, double c) {
  check_y(c);
  if (auto* d = std::get_if<DiscreteDistribution>(&f)) {
    double e = 0.0;
    for (std::size_t i = 0; i < d->points().size(); ++i)
      e += std::max(d->points()[i] - c, 0.0) * d->probs()[i];
    return e;
  }
  if (auto* q = std::get_if<QuantileSet>(&f))
    return std::max((1.0 - c) - (q->cdf_integral(1.0) - q->cdf_integral(c)), 0.0);
  const auto& p = std::get<ParametricDensity>(f);
  return std::max(p.mean() - p.partial_mean(c) - c * (1.0 - p.cdf(c)), 0.0);
}

double expected_shortfall(const PredictiveCDF& f, double c) {
  check_y(c);
  if (auto* d = std::get_if<DiscreteDistribution>(&f)) {
    double e = 0.0;
    for (std::size_t i = 0; i < d->points().size(); ++i)
      e += std::max(c - d->points()[i], 0.0) * d->probs()[i];
    return e;
  }
  if (auto* q = std::get_if<QuantileSet>(&f)) return q->cdf_integral(c);
  const auto& p = std::get<ParametricDensity>(f);
  return std::max(c * p.cdf(c) - p.partial_mean(c), 0.0);
}

}  // namespace windcast::prob
