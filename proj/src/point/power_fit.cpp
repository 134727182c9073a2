#include "windcast/point/power_fit.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "windcast/core/error.hpp"

namespace windcast::point {

double LogisticCurve::operator()(double speed) const {
  return 1.0 / (1.0 + std::exp(-(speed - midpoint) / width));
}

namespace {

double sse(const LogisticCurve& c, std::span<const double> w, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = y[i] - c(w[i]);
    s += r * r;
  }
  return s;
}

}  // namespace

LogisticCurve fit_logistic(std::span<const double> speeds, std::span<const double> powers) {
  if (speeds.size() != powers.size()) throw std::invalid_argument("speed/power length mismatch");
  if (speeds.size() < 20) throw DataError("too few rows to fit the speed-to-power curve");

  LogisticCurve best;
  double best_sse = INFINITY;
  for (double a = 2.0; a <= 20.0; a += 0.5)
    for (double b = 0.25; b <= 5.0; b += 0.25) {
      LogisticCurve c{a, b};
      const double s = sse(c, speeds, powers);
      if (s < best_sse) {
        best_sse = s;
        best = c;
      }
    }

  double damping = 1e-3;
  for (int it = 0; it < 100; ++it) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < speeds.size(); ++i) {
      const double g = best(speeds[i]);
      const double dg = g * (1.0 - g);
      Eigen::Vector2d j(-dg / best.width, -dg * (speeds[i] - best.midpoint) / (best.width * best.width));
      jtj += j * j.transpose();
      jtr += j * (powers[i] - g);
    }
    Eigen::Matrix2d lhs = jtj;
    lhs.diagonal() *= 1.0 + damping;
    const Eigen::Vector2d step = lhs.ldlt().solve(jtr);
    LogisticCurve trial{best.midpoint + step(0), best.width + step(1)};
    if (!(trial.width > 1e-3) || !std::isfinite(trial.midpoint)) {
      damping *= 10.0;
      continue;
    }
    const double s = sse(trial, speeds, powers);
    if (s < best_sse) {
      const double gain = best_sse - s;
      best = trial;
      best_sse = s;
      damping = std::max(damping / 10.0, 1e-9);
      if (gain < 1e-12 * (1.0 + best_sse)) break;
    } else {
      damping *= 10.0;
      if (damping > 1e8) break;
    }
  }
  return best;
}

}  // namespace windcast::point
