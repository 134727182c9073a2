#include "windcast/verify/scores.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/random.hpp"
#include "windcast/prob/quantile_regression.hpp"

namespace windcast::verify {

namespace {

constexpr int kCrpsIntervals = 2000;

void check_pairs(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("forecasts and observations differ in length");
  if (a == 0) throw std::invalid_argument("empty sample");
}

// Simpson over [lo, hi]; `left_end` / `right_end` give one-sided limits.
template <class F, class L, class R>
double simpson(F&& f, L&& left_end, R&& right_end, double lo, double hi, int intervals) {
  if (!(hi > lo)) return 0.0;
  intervals = std::max(2, intervals + intervals % 2);
  const double h = (hi - lo) / intervals;
  double sum = left_end(lo) + right_end(hi);
  for (int i = 1; i < intervals; ++i) sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

double pinball(std::span<const double> q, std::span<const double> y, double alpha) {
  check_pairs(q.size(), y.size());
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += prob::check_loss(y[i] - q[i], alpha);
  return s / static_cast<double>(q.size());
}

double crps(const prob::PredictiveCDF& f, double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("observation outside [0,1]");
  if (auto* d = std::get_if<prob::DiscreteDistribution>(&f)) {
    const auto& x = d->points();
    const auto& p = d->probs();
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      a += p[i] * std::abs(x[i] - y);
      for (std::size_t j = 0; j < x.size(); ++j) b += p[i] * p[j] * std::abs(x[i] - x[j]);
    }
    return a - 0.5 * b;
  }
  auto sq = [&](double x) { double v = prob::cdf_eval(f, x); return v * v; };
  auto sq_left = [&](double x) { double v = prob::cdf_left(f, x); return v * v; };
  auto up = [&](double x) { double v = 1.0 - prob::cdf_eval(f, x); return v * v; };
  auto up_left = [&](double x) { double v = 1.0 - prob::cdf_left(f, x); return v * v; };
  const int below = static_cast<int>(std::lround(kCrpsIntervals * y));
  return simpson(sq, sq, sq_left, 0.0, y, below) +
         simpson(up, up, up_left, y, 1.0, kCrpsIntervals - below);
}

double crps_ensemble(std::span<const double> members, double y) {
  if (members.empty()) throw std::invalid_argument("empty ensemble");
  const double n = static_cast<double>(members.size());
  double a = 0.0, b = 0.0;
  for (double x : members) a += std::abs(x - y);
  for (double xi : members)
    for (double xj : members) b += std::abs(xi - xj);
  return a / n - b / (2.0 * n * n);
}

double energy_score(const copula::TrajectorySet& set, std::span<const double> y) {
  if (set.size() < 2) throw std::invalid_argument("energy score needs at least two trajectories");
  for (const auto& p : set.paths)
    if (p.size() != y.size()) throw std::invalid_argument("trajectory and observation dimensions differ");
  auto dist = [](const std::vector<double>& a, auto&& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  const double j = static_cast<double>(set.size());
  double a = 0.0, b = 0.0;
  for (const auto& p : set.paths) a += dist(p, y);
  for (const auto& p : set.paths)
    for (const auto& q : set.paths) b += dist(p, q);
  return a / j - b / (2.0 * j * j);
}

PointMetrics point_metrics(std::span<const double> forecast, std::span<const double> y) {
  check_pairs(forecast.size(), y.size());
  double se = 0.0, ae = 0.0, e = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = forecast[i] - y[i];
    se += d * d;
    ae += std::abs(d);
    e += d;
  }
  const double n = static_cast<double>(y.size());
  return {std::sqrt(se / n), ae / n, e / n, y.size()};
}

double block_bootstrap_se(std::span<const double> values, std::size_t block, int replicates,
                          std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  if (block < 1 || replicates < 2) throw std::invalid_argument("bootstrap needs block >= 1 and >= 2 replicates");
  const std::size_t n = values.size();
  block = std::min(block, n);
  auto rng = make_stream({seed, n, block});
  std::uniform_int_distribution<std::size_t> start(0, n - 1);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    double s = 0.0;
    std::size_t taken = 0;
    while (taken < n) {
      const std::size_t b0 = start(rng);
      for (std::size_t i = 0; i < block && taken < n; ++i, ++taken) s += values[(b0 + i) % n];
    }
    means.push_back(s / static_cast<double>(n));
  }
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(means.size());
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  return std::sqrt(var / static_cast<double>(means.size() - 1));
}

ScoreEntry summarize(std::string metric, int lead, std::span<const double> values, std::size_t block,
                     int replicates, std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  const double se = values.size() > 1
                        ? block_bootstrap_se(values, block, replicates, seed + static_cast<std::uint64_t>(lead))
                        : 0.0;
  return {std::move(metric), lead, m, se, values.size()};
}

void write_scores(std::ostream& out, const std::vector<ScoreEntry>& scores) {
  out << "metric,lead_h,value,se,n\n";
  for (const auto& s : scores)
    out << fmt::format("{},{},{},{},{}\n", s.metric, s.lead, csv::fmt_double(s.value),
                       csv::fmt_double(s.se), s.n);
}

void write_scores(const std::filesystem::path& path, const std::vector<ScoreEntry>& scores) {
  auto out = csv::open_out(path);
  write_scores(out, scores);
}

}  // namespace windcast::verify
