#include "windcast/prob/quantile_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace windcast::prob {

namespace {

constexpr double kMaxRate = 50.0;

// Tail density at the outer end is rate / (1 - e^-rate) times the linear one;
// solve that factor for the requested slope ratio.
double fit_rate(double ratio) {
  if (!std::isfinite(ratio)) return kMaxRate;
  auto factor = [](double r) { return std::abs(r) < 1e-10 ? 1.0 : r / -std::expm1(-r); };
  if (ratio <= factor(-kMaxRate)) return -kMaxRate;
  if (ratio >= factor(kMaxRate)) return kMaxRate;
  double lo = -kMaxRate, hi = kMaxRate;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    double mid = 0.5 * (lo + hi);
    (factor(mid) < ratio ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double tail_shape(double u, double rate) {
  if (std::abs(rate) < 1e-10) return u;
  return std::expm1(rate * u) / std::expm1(rate);
}

double tail_shape_inverse(double p, double rate) {
  if (std::abs(rate) < 1e-10) return p;
  return std::log1p(p * std::expm1(rate)) / rate;
}

double tail_shape_integral(double u, double rate) {
  if (std::abs(rate) < 1e-4) {
    const double r = rate;
    return (u * u / 2.0 + r * u * u * u / 6.0 + r * r * u * u * u * u / 24.0) / (1.0 + r / 2.0 + r * r / 6.0);
  }
  return (std::expm1(rate * u) / rate - u) / std::expm1(rate);
}

std::vector<double> rearrange(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values;
}

QuantileSet::QuantileSet(std::vector<double> levels, std::vector<double> values)
    : levels_(std::move(levels)), values_(std::move(values)) {
  if (levels_.size() < 2) throw std::invalid_argument("quantile set needs at least two levels");
  if (levels_.size() != values_.size())
    throw std::invalid_argument("quantile levels and values differ in length");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!(levels_[i] > 0.0 && levels_[i] < 1.0))
      throw std::invalid_argument("quantile levels must lie in (0,1)");
    if (i > 0 && !(levels_[i] > levels_[i - 1]))
      throw std::invalid_argument("quantile levels must be strictly increasing");
    if (!std::isfinite(values_[i])) throw std::invalid_argument("quantile values must be finite");
    values_[i] = std::clamp(values_[i], 0.0, 1.0);
  }
  rearranged_ = !std::is_sorted(values_.begin(), values_.end());
  if (rearranged_) values_ = rearrange(std::move(values_));

  const std::size_t l = levels_.size();
  const double q1 = values_[0], ql = values_[l - 1];
  if (q1 > 0.0) {
    const double gap = values_[1] - values_[0];
    const double slope = gap > 0.0 ? (levels_[1] - levels_[0]) / gap : INFINITY;
    lower_rate_ = fit_rate(slope * q1 / levels_[0]);
  }
  if (ql < 1.0) {
    const double gap = values_[l - 1] - values_[l - 2];
    const double slope = gap > 0.0 ? (levels_[l - 1] - levels_[l - 2]) / gap : INFINITY;
    upper_rate_ = fit_rate(slope * (1.0 - ql) / (1.0 - levels_[l - 1]));
  }
}

double QuantileSet::lower_tail(double y) const {
  return levels_.front() * tail_shape(y / values_.front(), lower_rate_);
}

double QuantileSet::upper_tail(double y) const {
  const double a = levels_.back();
  return 1.0 - (1.0 - a) * tail_shape((1.0 - y) / (1.0 - values_.back()), upper_rate_);
}

double QuantileSet::interior(std::size_t j, double y) const {
  const double w = (y - values_[j]) / (values_[j + 1] - values_[j]);
  return levels_[j] + w * (levels_[j + 1] - levels_[j]);
}

double QuantileSet::cdf(double y) const {
  if (y < 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  // Last node with q_j <= y.
  auto it = std::upper_bound(values_.begin(), values_.end(), y);
  if (it == values_.begin()) return lower_tail(y);
  const auto j = static_cast<std::size_t>(it - values_.begin()) - 1;
  if (j + 1 == values_.size()) return upper_tail(y);
  return interior(j, y);
}

double QuantileSet::cdf_left(double y) const {
  if (y <= 0.0) return 0.0;
  if (y > 1.0) return 1.0;
  // Last node with q_j < y.
  auto it = std::lower_bound(values_.begin(), values_.end(), y);
  if (it == values_.begin()) return lower_tail(y);
  const auto j = static_cast<std::size_t>(it - values_.begin()) - 1;
  if (j + 1 == values_.size()) return upper_tail(y);
  return interior(j, y);
}

double QuantileSet::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
  const std::size_t l = levels_.size();
  if (alpha <= levels_[0]) {
    if (values_[0] <= 0.0) return 0.0;
    return values_[0] * tail_shape_inverse(alpha / levels_[0], lower_rate_);
  }
  if (alpha > levels_[l - 1]) {
    if (values_[l - 1] >= 1.0) return 1.0;
    const double p = (1.0 - alpha) / (1.0 - levels_[l - 1]);
    return 1.0 - (1.0 - values_[l - 1]) * tail_shape_inverse(p, upper_rate_);
  }
  auto it = std::lower_bound(levels_.begin(), levels_.end(), alpha);
  const auto j = static_cast<std::size_t>(it - levels_.begin());
  if (levels_[j] == alpha) return values_[j];
  const double w = (alpha - levels_[j - 1]) / (levels_[j] - levels_[j - 1]);
  return values_[j - 1] + w * (values_[j] - values_[j - 1]);
}

double QuantileSet::cdf_integral(double x) const {
  x = std::clamp(x, 0.0, 1.0);
  const std::size_t l = levels_.size();
  const double q1 = values_[0], ql = values_[l - 1];
  if (x <= q1) return q1 > 0.0 ? levels_[0] * q1 * tail_shape_integral(x / q1, lower_rate_) : 0.0;
  double total = q1 > 0.0 ? levels_[0] * q1 * tail_shape_integral(1.0, lower_rate_) : 0.0;
  for (std::size_t j = 0; j + 1 < l && values_[j] < x; ++j) {
    const double width = values_[j + 1] - values_[j];
    if (width <= 0.0) continue;
    const double end = std::min(x, values_[j + 1]);
    total += 0.5 * (end - values_[j]) * (levels_[j] + interior(j, end));
  }
  if (x > ql) {
    const double span = 1.0 - ql;
    total += (x - ql) - (1.0 - levels_[l - 1]) * span *
                            (tail_shape_integral(1.0, upper_rate_) -
                             tail_shape_integral((1.0 - x) / span, upper_rate_));
  }
  return total;
}

}  // namespace windcast::prob
