#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "windcast/app/config.hpp"

namespace windcast::app {

enum class Stage { Simulate, Fit, Forecast, Trajectories, Trade, Reserve, Verify };

std::string_view stage_name(Stage stage);
/// Throws ConfigError for an unknown name.
Stage parse_stage(std::string_view name);
const std::vector<Stage>& all_stages();

struct RunOptions {
  bool emit_plots_data = false;
  unsigned threads = 1;  // per-site worker cap
};

/// File layout under the output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path series() const { return root / "data" / "series.csv"; }
  std::filesystem::path nwp(const std::string& site) const {
    return root / "data" / ("nwp_" + site + ".csv");
  }
  std::filesystem::path point_model(const std::string& site) const {
    return root / "models" / ("point_" + site + ".txt");
  }
  std::filesystem::path prob_model(const std::string& site) const {
    return root / "models" / ("prob_" + site + ".txt");
  }
  std::filesystem::path point_forecasts() const { return root / "forecasts" / "point.csv"; }
  std::filesystem::path quantiles() const { return root / "forecasts" / "quantiles.csv"; }
  std::filesystem::path warmup_quantiles() const { return root / "forecasts" / "quantiles_warmup.csv"; }
  std::filesystem::path parametric() const { return root / "forecasts" / "parametric.csv"; }
  std::filesystem::path fan_chart() const { return root / "plots" / "fan_chart.csv"; }
  std::filesystem::path trajectories() const { return root / "trajectories" / "trajectories.csv"; }
  std::filesystem::path covariance() const { return root / "trajectories" / "covariance.txt"; }
  std::filesystem::path prices() const { return root / "trade" / "prices.csv"; }
  std::filesystem::path price_forecasts() const { return root / "trade" / "price_forecasts.csv"; }
  std::filesystem::path bids() const { return root / "trade" / "bids.csv"; }
  std::filesystem::path settlement() const { return root / "trade" / "settlement.csv"; }
  std::filesystem::path reserves() const { return root / "reserve" / "reserves.csv"; }
  std::filesystem::path scores() const { return root / "verify" / "scores.csv"; }
  std::filesystem::path reliability() const { return root / "verify" / "reliability.csv"; }
  std::filesystem::path conditional_reliability() const {
    return root / "verify" / "reliability_by_lead.csv";
  }
  std::filesystem::path pit() const { return root / "verify" / "pit.csv"; }
  std::filesystem::path run_config() const { return root / "run_config.ini"; }
};

void run_stage(Stage stage, const RunConfig& config, const RunOptions& options = {});

/// Runs every stage from `from` (default: the first) to the last in order.
void run_pipeline(const RunConfig& config, const RunOptions& options = {},
                  std::optional<Stage> from = std::nullopt);

/// Row split: rows below the returned index train the models.
std::size_t train_rows(const RunConfig& config, std::size_t total_rows);

/// Quantile-regression features for one point forecast: 1, yhat, yhat (1 - yhat).
Eigen::VectorXd quantile_features(double point);

}  // namespace windcast::app
