#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "windcast/core/series.hpp"
#include "windcast/point/nwp.hpp"
#include "windcast/sim/power_curve.hpp"

namespace windcast::sim {

/// Two-regime innovation volatility keyed on the previous hour's speed.
struct RegimeSwitch {
  double threshold = 8.0;  // m/s
  double sd_low = 0.5;     // innovation sd while speed < threshold
  double sd_high = 1.0;
};

struct SimConfig {
  SiteSet sites;
  std::vector<double> ar_coefficient;     // per site, in (0,1)
  Eigen::MatrixXd spatial_correlation;    // m x m, unit diagonal
  std::vector<double> mean_speed;         // m/s per site
  double speed_sd = 1.0;                  // innovation sd of the latent anomaly
  double diurnal_amplitude = 0.0;         // m/s
  double diurnal_phase = 0.0;             // hours
  std::optional<RegimeSwitch> regime;
  PowerCurveSpec curve;
  /// Scatter around the power curve, scaled by 4c(1-c) so it vanishes at the bounds.
  double power_noise_sd = 0.0;
  /// Random-walk step of the shared wind direction, degrees per hour.
  double direction_step_sd = 5.0;
  TimePoint start;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimResult {
  std::vector<TimePoint> times;
  Eigen::MatrixXd speed;       // hours x sites, m/s, floored at 0
  Eigen::MatrixXd anomaly;     // latent AR(1) component
  Eigen::MatrixXi regime;      // 0 = low volatility, 1 = high (all 0 without a switch)
  std::vector<double> direction_deg;
  SpaceTimeSeries power;

  /// Speeds divided by `scale` as a normalized series (values must stay <= 1).
  SpaceTimeSeries speed_series(double scale) const;
};

/// Latent speed = mean + diurnal sine + AR(1) anomaly driven by spatially
/// correlated Gaussian innovations; power = power_curve(speed).
SimResult simulate(const SimConfig& config, std::size_t hours);

/// Synthetic NWP for one site: forecasts at every `every`-th hour with leads
/// 1..horizon built from the true speed and direction plus Gaussian speed
/// errors whose sd grows linearly from 0 to `error_sd` over the horizon.
point::NwpArchive synthesize_nwp(const SimResult& sim, std::size_t site, int horizon, int every,
                                 double error_sd, std::uint64_t seed);

/// Spatial correlation decaying with site index distance: rho^|i-j|.
Eigen::MatrixXd exponential_correlation(std::size_t m, double rho);

}  // namespace windcast::sim
