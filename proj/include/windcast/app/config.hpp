#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "windcast/core/series.hpp"
#include "windcast/decisions/market.hpp"
#include "windcast/decisions/reserves.hpp"
#include "windcast/point/model.hpp"
#include "windcast/prob/parametric.hpp"
#include "windcast/sim/simulator.hpp"

namespace windcast::app {

enum class ProbMethod { QuantileRegression, Dressing, Parametric };

struct RunSection {
  std::uint64_t seed = 42;
  std::filesystem::path out = "out";
  int hours = 16000;
  double train_fraction = 0.75;
  int issue_hour = 12;  // UTC hour of the daily forecast origin
};

struct SimulatorSection {
  std::vector<double> ar_coefficient = {0.95};  // one value or one per site
  std::vector<double> mean_speed = {9.0};
  double speed_sd = 1.2;
  double spatial_rho = 0.6;
  double diurnal_amplitude = 1.5;
  double diurnal_phase = 9.0;
  std::optional<sim::RegimeSwitch> regime;
  sim::PowerCurveSpec curve;
  double power_noise_sd = 0.03;
  double direction_step_sd = 5.0;
  TimePoint start;
  double nwp_error_sd = 1.0;
  int nwp_every = 6;
};

struct ModelSection {
  point::ModelSpec spec;
  double forgetting = 1.0;  // lambda_f; recursive fit below 1
};

struct ProbSection {
  ProbMethod method = ProbMethod::QuantileRegression;
  std::vector<double> levels = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5,
                                0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  double forgetting = 1.0;  // lambda_q
  prob::Family family = prob::Family::CensoredGaussian;
  double variance_smoothing = 0.98;
  int training_every = 12;  // hours between training origins of the probabilistic layer
};

struct CopulaSection {
  double smoothing = 0.98;  // lambda_c
  int trajectories = 12;
  int warmup_days = 60;  // training-period origins used to initialize the covariance
};

struct MarketSection {
  decisions::MarketSpec spec;
  std::string site;                    // empty: first site
  std::optional<std::filesystem::path> prices;  // realized prices; synthetic when absent
};

struct ReserveSection {
  decisions::ReserveCost up{1.0, 20.0};
  decisions::ReserveCost down{1.0, 10.0};
  double load_error_sd = 0.02;
  double outage_probability = 0.01;
  double outage_size = 0.05;
  double step = 0.001;
  int scenarios = 1000;
};

struct VerifySection {
  int bootstrap_block = 24;
  int replicates = 200;
};

struct RunConfig {
  RunSection run;
  SiteSet sites;
  SimulatorSection simulator;
  ModelSection model;
  ProbSection probabilistic;
  CopulaSection copula;
  MarketSection market;
  ReserveSection reserve;
  VerifySection verify;

  /// Range checks on every hyperparameter; throws ConfigError.
  void validate() const;
  /// Throws ConfigError when a referenced file does not exist.
  void check_paths() const;
  sim::SimConfig simulator_config() const;
  std::size_t market_site() const;
};

/// Five synthetic sites (31/18/17/23/10 % of 2.5 GW) and all defaults.
RunConfig default_config();

/// INI-style document: `[section]` headers, `key = value`, `#` or `;`
/// comments. Unknown sections and keys are rejected; keys may be omitted.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

std::string_view method_name(ProbMethod m);
ProbMethod parse_method(std::string_view name);

}  // namespace windcast::app
