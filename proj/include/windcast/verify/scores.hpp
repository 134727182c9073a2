#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "windcast/copula/copula.hpp"
#include "windcast/prob/predictive_cdf.hpp"

namespace windcast::verify {

/// Mean check loss of quantile forecasts q at level alpha.
double pinball(std::span<const double> q, std::span<const double> y, double alpha);

/// Integral of (F(x) - 1{x >= y})^2 over [0,1] by composite Simpson on
/// 2,001 nodes; exact for discrete distributions.
double crps(const prob::PredictiveCDF& f, double y);

/// Sample CRPS of an ensemble: mean |x_j - y| - mean |x_i - x_j| / 2.
double crps_ensemble(std::span<const double> members, double y);

/// Ensemble energy score over the flattened site-major vector.
double energy_score(const copula::TrajectorySet& set, std::span<const double> y);

struct PointMetrics {
  double rmse;
  double mae;
  double bias;  // mean(yhat - y)
  std::size_t n;
};
PointMetrics point_metrics(std::span<const double> forecast, std::span<const double> y);

/// Block-bootstrap standard error of the mean of `values` (in time order).
double block_bootstrap_se(std::span<const double> values, std::size_t block, int replicates,
                          std::uint64_t seed);

struct ScoreEntry {
  std::string metric;
  int lead;  // 0 for the overall value
  double value;
  double se;
  std::size_t n;
};

/// Mean and block-bootstrap SE of per-case scores.
ScoreEntry summarize(std::string metric, int lead, std::span<const double> values,
                     std::size_t block = 24, int replicates = 200, std::uint64_t seed = 1);

/// `metric,lead_h,value,se,n`.
void write_scores(std::ostream& out, const std::vector<ScoreEntry>& scores);
void write_scores(const std::filesystem::path& path, const std::vector<ScoreEntry>& scores);

}  // namespace windcast::verify
