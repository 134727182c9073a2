#include "windcast/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "windcast/core/error.hpp"
#include "windcast/core/random.hpp"

namespace windcast::sim {

void SimConfig::validate() const {
  const std::size_t m = sites.size();
  if (m == 0) throw std::invalid_argument("simulation needs at least one site");
  if (ar_coefficient.size() != m || mean_speed.size() != m)
    throw std::invalid_argument("per-site simulator parameters must match the site count");
  for (double phi : ar_coefficient)
    if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("AR coefficient must lie in (0,1)");
  if (spatial_correlation.rows() != static_cast<Eigen::Index>(m) ||
      spatial_correlation.cols() != static_cast<Eigen::Index>(m))
    throw std::invalid_argument("spatial correlation must be m x m");
  for (Eigen::Index i = 0; i < spatial_correlation.rows(); ++i) {
    if (std::abs(spatial_correlation(i, i) - 1.0) > 1e-12)
      throw std::invalid_argument("spatial correlation needs a unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(spatial_correlation(i, j) - spatial_correlation(j, i)) > 1e-12)
        throw std::invalid_argument("spatial correlation must be symmetric");
  }
  if (speed_sd < 0.0 || diurnal_amplitude < 0.0 || power_noise_sd < 0.0 || direction_step_sd < 0.0)
    throw std::invalid_argument("amplitudes and standard deviations must be >= 0");
  if (regime && (regime->sd_low < 0.0 || regime->sd_high < 0.0))
    throw std::invalid_argument("regime standard deviations must be >= 0");
  curve.validate();
}

Eigen::MatrixXd exponential_correlation(std::size_t m, double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (-1,1)");
  Eigen::MatrixXd c(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      c(i, j) = std::pow(rho, std::abs(static_cast<double>(i) - static_cast<double>(j)));
  return c;
}

SpaceTimeSeries SimResult::speed_series(double scale) const {
  const auto m = static_cast<std::size_t>(speed.cols());
  std::vector<double> values(times.size() * m);
  for (std::size_t t = 0; t < times.size(); ++t)
    for (std::size_t s = 0; s < m; ++s)
      values[t * m + s] = speed(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) / scale;
  return SpaceTimeSeries(power.sites(), times, std::move(values));
}

SimResult simulate(const SimConfig& config, std::size_t hours) {
  config.validate();
  if (hours < 1) throw std::invalid_argument("simulation needs hours >= 1");

  const auto m = static_cast<Eigen::Index>(config.sites.size());
  Eigen::LLT<Eigen::MatrixXd> llt(config.spatial_correlation);
  if (llt.info() != Eigen::Success) throw NumericError("spatial correlation is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    Eigen::VectorXd e(m);
    for (Eigen::Index i = 0; i < m; ++i) e(i) = normal(rng);
    return Eigen::VectorXd(chol * e);
  };

  SimResult out;
  const auto n = static_cast<Eigen::Index>(hours);
  out.times.resize(hours);
  out.speed.resize(n, m);
  out.anomaly.resize(n, m);
  out.regime = Eigen::MatrixXi::Zero(n, m);
  out.direction_deg.resize(hours);

  auto innovation_sd = [&](double previous_speed, int& regime) {
    if (!config.regime) return config.speed_sd;
    regime = previous_speed < config.regime->threshold ? 0 : 1;
    return regime == 0 ? config.regime->sd_low : config.regime->sd_high;
  };
  auto diurnal = [&](TimePoint t) {
    double h = hour_of_day(t);
    return config.diurnal_amplitude *
           std::sin(2.0 * std::numbers::pi * (h - config.diurnal_phase) / 24.0);
  };

  std::uniform_real_distribution<double> uniform_dir(0.0, 360.0);
  double direction = uniform_dir(rng);
  std::vector<double> power(hours * static_cast<std::size_t>(m));

  for (Eigen::Index t = 0; t < n; ++t) {
    out.times[static_cast<std::size_t>(t)] = config.start + Hours{t};
    Eigen::VectorXd shock = draw();
    for (Eigen::Index s = 0; s < m; ++s) {
      const double phi = config.ar_coefficient[static_cast<std::size_t>(s)];
      double a = 0.0;
      if (t == 0) {
        int regime = 0;
        double sd = innovation_sd(config.mean_speed[static_cast<std::size_t>(s)], regime);
        a = sd / std::sqrt(1.0 - phi * phi) * shock(s);
        out.regime(t, s) = regime;
      } else {
        int regime = 0;
        double sd = innovation_sd(out.speed(t - 1, s), regime);
        a = phi * out.anomaly(t - 1, s) + sd * shock(s);
        out.regime(t, s) = regime;
      }
      out.anomaly(t, s) = a;
      double v = config.mean_speed[static_cast<std::size_t>(s)] +
                 diurnal(out.times[static_cast<std::size_t>(t)]) + a;
      out.speed(t, s) = std::max(v, 0.0);
    }
    direction = std::fmod(direction + config.direction_step_sd * normal(rng) + 360.0, 360.0);
    out.direction_deg[static_cast<std::size_t>(t)] = direction;

    for (Eigen::Index s = 0; s < m; ++s) {
      double c = power_curve(out.speed(t, s), config.curve);
      if (config.power_noise_sd > 0.0)
        c = std::clamp(c + config.power_noise_sd * 4.0 * c * (1.0 - c) * normal(rng), 0.0, 1.0);
      power[static_cast<std::size_t>(t * m + s)] = c;
    }
  }
  out.power = SpaceTimeSeries(config.sites, out.times, std::move(power));
  return out;
}

point::NwpArchive synthesize_nwp(const SimResult& sim, std::size_t site, int horizon, int every,
                                 double error_sd, std::uint64_t seed) {
  if (horizon < 1 || every < 1) throw std::invalid_argument("NWP horizon and cadence must be >= 1");
  if (site >= static_cast<std::size_t>(sim.speed.cols())) throw std::out_of_range("NWP site");
  const auto hours = sim.times.size();
  std::vector<point::NwpForecast> runs;
  for (std::size_t origin = 0; origin + static_cast<std::size_t>(horizon) < hours;
       origin += static_cast<std::size_t>(every)) {
    auto rng = make_stream({seed, site, origin});
    std::normal_distribution<double> normal(0.0, 1.0);
    point::NwpForecast run;
    run.origin = sim.times[origin];
    run.u.resize(static_cast<std::size_t>(horizon));
    run.v.resize(static_cast<std::size_t>(horizon));
    for (int k = 1; k <= horizon; ++k) {
      const auto row = static_cast<Eigen::Index>(origin) + k;
      double speed = sim.speed(row, static_cast<Eigen::Index>(site));
      if (error_sd > 0.0) speed = std::max(0.0, speed + error_sd * k / horizon * normal(rng));
      double theta = sim.direction_deg[static_cast<std::size_t>(row)] * std::numbers::pi / 180.0;
      run.u[static_cast<std::size_t>(k - 1)] = speed * std::sin(theta);
      run.v[static_cast<std::size_t>(k - 1)] = speed * std::cos(theta);
    }
    runs.push_back(std::move(run));
  }
  return point::NwpArchive(std::move(runs));
}

}  // namespace windcast::sim
