#include "windcast/decisions/reserves.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"
#include "windcast/prob/normal.hpp"

namespace windcast::decisions {

namespace {

// Drop zero-mass cells at both ends.
GridDensity trimmed(double first, double step, std::vector<double> mass) {
  std::size_t lo = 0, hi = mass.size();
  while (lo < hi && mass[lo] == 0.0) ++lo;
  while (hi > lo && mass[hi - 1] == 0.0) --hi;
  if (lo == hi) throw NumericError("density has no mass");
  std::vector<double> kept(mass.begin() + static_cast<std::ptrdiff_t>(lo),
                           mass.begin() + static_cast<std::ptrdiff_t>(hi));
  return GridDensity(first + static_cast<double>(lo) * step, step, std::move(kept));
}

long grid_index(double x, double step) { return std::lround(x / step); }

}  // namespace

GridDensity::GridDensity(double first, double step, std::vector<double> mass)
    : first_(first), step_(step), mass_(std::move(mass)) {
  if (!(step > 0.0) || !std::isfinite(first)) throw std::invalid_argument("grid needs a positive step");
  if (mass_.empty()) throw std::invalid_argument("grid density needs at least one cell");
  for (double m : mass_)
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("grid masses must be >= 0");
}

GridDensity GridDensity::point_mass(double x, double step) {
  return GridDensity(static_cast<double>(grid_index(x, step)) * step, step, {1.0});
}

GridDensity GridDensity::gaussian(double mean, double sd, double step) {
  if (!(sd > 0.0)) throw std::invalid_argument("Gaussian preset needs sd > 0");
  const long lo = grid_index(mean - 8.0 * sd, step), hi = grid_index(mean + 8.0 * sd, step);
  std::vector<double> mass;
  for (long i = lo; i <= hi; ++i) {
    const double x = static_cast<double>(i) * step;
    mass.push_back(prob::normal_cdf((x + 0.5 * step - mean) / sd) -
                   prob::normal_cdf((x - 0.5 * step - mean) / sd));
  }
  double total = 0.0;
  for (double m : mass) total += m;
  for (double& m : mass) m /= total;
  return GridDensity(static_cast<double>(lo) * step, step, std::move(mass));
}

GridDensity GridDensity::uniform(double lo, double hi, double step) {
  if (!(hi > lo)) throw std::invalid_argument("uniform preset needs hi > lo");
  const long a = grid_index(lo, step), b = grid_index(hi, step);
  const auto n = static_cast<std::size_t>(b - a + 1);
  return GridDensity(static_cast<double>(a) * step, step, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

GridDensity GridDensity::two_point_outage(double probability, double size, double step) {
  if (!(probability >= 0.0 && probability <= 1.0)) throw std::invalid_argument("outage probability outside [0,1]");
  if (!(size >= 0.0)) throw std::invalid_argument("outage size must be >= 0");
  const long k = grid_index(size, step);
  if (k == 0 || probability == 0.0) return point_mass(0.0, step);
  std::vector<double> mass(static_cast<std::size_t>(k + 1), 0.0);
  mass.front() = probability;
  mass.back() = 1.0 - probability;
  return trimmed(static_cast<double>(-k) * step, step, std::move(mass));
}

GridDensity GridDensity::from_samples(std::span<const double> samples, double step) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  long lo = grid_index(samples[0], step), hi = lo;
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite sample");
    lo = std::min(lo, grid_index(v, step));
    hi = std::max(hi, grid_index(v, step));
  }
  std::vector<double> mass(static_cast<std::size_t>(hi - lo + 1), 0.0);
  const double w = 1.0 / static_cast<double>(samples.size());
  for (double v : samples) mass[static_cast<std::size_t>(grid_index(v, step) - lo)] += w;
  return GridDensity(static_cast<double>(lo) * step, step, std::move(mass));
}

double GridDensity::total() const {
  double t = 0.0;
  for (double m : mass_) t += m;
  return t;
}

double GridDensity::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) s += mass_[i] * x(i);
  return s / total();
}

double GridDensity::variance() const {
  const double m = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) s += mass_[i] * (x(i) - m) * (x(i) - m);
  return s / total();
}

double GridDensity::quantile(double level) const {
  if (!(level > 0.0 && level <= 1.0)) throw std::invalid_argument("quantile level outside (0,1]");
  const double target = level * total();
  if (level >= 1.0) {
    for (std::size_t i = mass_.size(); i-- > 0;)
      if (mass_[i] > 0.0) return x(i);
  }
  double cum = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    cum += mass_[i];
    if (cum >= target * (1.0 - 1e-12)) return x(i);
  }
  return x(mass_.size() - 1);
}

GridDensity convolve(const GridDensity& a, const GridDensity& b) {
  if (std::abs(a.step() - b.step()) > 1e-9 * a.step())
    throw DataError(fmt::format("incompatible grids: steps {} and {}", a.step(), b.step()));
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ma = a.mass()[i];
    if (ma == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += ma * b.mass()[j];
  }
  return trimmed(a.first() + b.first(), a.step(), std::move(out));
}

void ReserveCost::validate() const {
  if (!(holding >= 0.0) || !(shortage > holding))
    throw std::invalid_argument("reserve cost needs shortage slope > holding slope >= 0");
}

GridDensity convolve_margin(const ReserveProblem& problem) {
  GridDensity m = convolve(convolve(problem.load_error, problem.generation_loss), problem.wind_error);
  std::vector<double> mass = m.mass();
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (std::abs(m.x(i)) > problem.support_limit + 0.5 * m.step()) mass[i] = 0.0;
  double total = 0.0;
  for (double v : mass) total += v;
  if (!(total > 0.0)) throw NumericError("margin density has no mass inside the support limit");
  for (double& v : mass) v /= total;
  return trimmed(m.first(), m.step(), std::move(mass));
}

SplitMargin split(const GridDensity& margin) {
  const double step = margin.step();
  long top_pos = 0, top_neg = 0;
  for (std::size_t i = 0; i < margin.size(); ++i) {
    const long k = grid_index(margin.x(i), step);
    top_pos = std::max(top_pos, k);
    top_neg = std::max(top_neg, -k);
  }
  std::vector<double> pos(static_cast<std::size_t>(top_pos + 1), 0.0),
      neg(static_cast<std::size_t>(top_neg + 1), 0.0);
  for (std::size_t i = 0; i < margin.size(); ++i) {
    const long k = grid_index(margin.x(i), step);
    pos[static_cast<std::size_t>(std::max(k, 0L))] += margin.mass()[i];
    neg[static_cast<std::size_t>(std::max(-k, 0L))] += margin.mass()[i];
  }
  return {GridDensity(0.0, step, std::move(pos)), GridDensity(0.0, step, std::move(neg))};
}

double expected_reserve_cost(const GridDensity& part, const ReserveCost& cost, double q) {
  double e = 0.0;
  for (std::size_t i = 0; i < part.size(); ++i) {
    const double d = part.x(i) - q;
    e += part.mass()[i] * (d > 0.0 ? cost.shortage * d : -cost.holding * d);
  }
  return e;
}

double grid_search_reserve(const GridDensity& part, const ReserveCost& cost) {
  cost.validate();
  // Prefix sums give E[(q - X)^+] and E[(X - q)^+] at each grid point in O(n).
  const auto n = part.size();
  double total_mass = 0.0, total_first = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_mass += part.mass()[i];
    total_first += part.mass()[i] * part.x(i);
  }
  double below_mass = 0.0, below_first = 0.0;
  double best_q = part.x(0), best = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    below_mass += part.mass()[i];
    below_first += part.mass()[i] * part.x(i);
    const double q = part.x(i);
    if (q < 0.0) continue;
    const double under = q * below_mass - below_first;
    const double over = (total_first - below_first) - q * (total_mass - below_mass);
    const double e = cost.holding * under + cost.shortage * over;
    if (e < best - 1e-15) {
      best = e;
      best_q = q;
    }
  }
  return best_q;
}

ReserveDecision optimal_reserves(const ReserveProblem& problem, const GridDensity& margin) {
  problem.up.validate();
  problem.down.validate();
  const auto parts = split(margin);
  ReserveDecision d{};
  d.q_down = parts.positive.quantile(problem.down.level());
  d.q_up = parts.negative.quantile(problem.up.level());
  d.grid_q_down = grid_search_reserve(parts.positive, problem.down);
  d.grid_q_up = grid_search_reserve(parts.negative, problem.up);
  d.expected_cost = expected_reserve_cost(parts.positive, problem.down, d.q_down) +
                    expected_reserve_cost(parts.negative, problem.up, d.q_up);
  return d;
}

void write_reserves(std::ostream& out, const std::vector<ReserveRecord>& records) {
  out << "origin,lead_h,q_up,q_down,expected_cost\n";
  for (const auto& r : records)
    out << fmt::format("{},{},{},{},{}\n", format_utc(r.origin), r.lead,
                       csv::fmt_double(r.decision.q_up), csv::fmt_double(r.decision.q_down),
                       csv::fmt_double(r.decision.expected_cost));
}

void write_reserves(const std::filesystem::path& path, const std::vector<ReserveRecord>& records) {
  auto out = csv::open_out(path);
  write_reserves(out, records);
}

}  // namespace windcast::decisions
