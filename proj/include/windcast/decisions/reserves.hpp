#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "windcast/core/time.hpp"

namespace windcast::decisions {

/// Probability masses on an equispaced grid x_i = first + i * step.
class GridDensity {
 public:
  GridDensity(double first, double step, std::vector<double> mass);

  static GridDensity point_mass(double x, double step);
  /// Discretized Gaussian over mean +- 8 sd (synthetic load-error preset).
  static GridDensity gaussian(double mean, double sd, double step);
  static GridDensity uniform(double lo, double hi, double step);
  /// Mass 1 - p at 0 and p at -size (synthetic generation-outage preset).
  static GridDensity two_point_outage(double probability, double size, double step);
  /// Histogram of samples rounded to the nearest grid point.
  static GridDensity from_samples(std::span<const double> samples, double step);

  double first() const { return first_; }
  double step() const { return step_; }
  const std::vector<double>& mass() const { return mass_; }
  std::size_t size() const { return mass_.size(); }
  double x(std::size_t i) const { return first_ + static_cast<double>(i) * step_; }

  double total() const;
  double mean() const;
  double variance() const;
  /// Smallest grid point with cumulative mass >= level; the top of the
  /// support at level 1.
  double quantile(double level) const;

 private:
  double first_;
  double step_;
  std::vector<double> mass_;
};

/// Direct grid convolution; steps must agree within 1e-9 relative.
GridDensity convolve(const GridDensity& a, const GridDensity& b);

/// Piecewise-linear cost g(x, q) = holding (q - x)^+ + shortage (x - q)^+.
struct ReserveCost {
  double holding = 0.0;
  double shortage = 1.0;

  void validate() const;
  double level() const { return shortage / (shortage + holding); }
};

struct ReserveProblem {
  GridDensity load_error;
  GridDensity generation_loss;
  GridDensity wind_error;
  ReserveCost up;    // deficit side
  ReserveCost down;  // surplus side
  double support_limit = 3.0;
};

/// Margin O split into O+ = max(O, 0) and O- = max(-O, 0).
struct SplitMargin {
  GridDensity positive;
  GridDensity negative;
};

/// f_O = f_L * f_G * f_Y, cut to +-support_limit and renormalized.
GridDensity convolve_margin(const ReserveProblem& problem);
SplitMargin split(const GridDensity& margin);

struct ReserveDecision {
  double q_up;
  double q_down;
  double expected_cost;
  double grid_q_up;    // grid-search optimum, for verification
  double grid_q_down;
};

/// E[g(X, q)] for a split density.
double expected_reserve_cost(const GridDensity& split_part, const ReserveCost& cost, double q);
/// Argmin of expected cost over the density's grid points (>= 0).
double grid_search_reserve(const GridDensity& split_part, const ReserveCost& cost);

ReserveDecision optimal_reserves(const ReserveProblem& problem, const GridDensity& margin);

struct ReserveRecord {
  TimePoint origin;
  int lead;
  ReserveDecision decision;
};
/// `origin,lead_h,q_up,q_down,expected_cost`.
void write_reserves(std::ostream& out, const std::vector<ReserveRecord>& records);
void write_reserves(const std::filesystem::path& path, const std::vector<ReserveRecord>& records);

}  // namespace windcast::decisions
