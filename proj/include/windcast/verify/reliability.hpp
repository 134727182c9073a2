#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "windcast/prob/predictive_cdf.hpp"

namespace windcast::verify {

struct ReliabilityRow {
  double alpha;
  double coverage;  // fraction of y <= q
  std::size_t n;
  std::string bin;  // empty for the unconditional table
};

/// quantiles[i][l] is the level-l quantile for case i.
std::vector<ReliabilityRow> reliability(const std::vector<std::vector<double>>& quantiles,
                                        std::span<const double> y, const std::vector<double>& levels,
                                        std::size_t min_count = 100);

/// Reliability per conditioner bin; bins[i] labels case i.
std::vector<ReliabilityRow> conditional_reliability(const std::vector<std::vector<double>>& quantiles,
                                                    std::span<const double> y,
                                                    const std::vector<double>& levels,
                                                    const std::vector<std::string>& bins);

/// PIT F(y), drawn uniformly in [F(y-), F(y)] at atoms.
std::vector<double> pit(const std::vector<prob::PredictiveCDF>& forecasts, std::span<const double> y,
                        std::uint64_t seed);

struct KsResult {
  double statistic;
  double p_value;
};
/// One-sample Kolmogorov-Smirnov test against U(0,1).
KsResult ks_uniform(std::vector<double> sample);

/// `alpha,coverage,n[,bin]`.
void write_reliability(std::ostream& out, const std::vector<ReliabilityRow>& rows);
void write_reliability(const std::filesystem::path& path, const std::vector<ReliabilityRow>& rows);

}  // namespace windcast::verify
