#pragma once

#include <cstddef>
#include <vector>

#include "windcast/prob/quantile_set.hpp"

namespace windcast::prob {

/// Forecast errors y - yhat binned by forecast level (5 equal bins on [0,1])
/// and lead bucket (6 h wide).
class ErrorClimatology {
 public:
  static constexpr int kLevelBins = 5;
  static constexpr int kLeadBucketHours = 6;

  /// `max_lead` fixes the number of lead buckets; bins with fewer than
  /// `min_count` errors fall back to the pooled errors of their lead bucket.
  explicit ErrorClimatology(int max_lead, std::size_t min_count = 200);

  void add(double point, int lead, double observed);
  /// Sorts the collected errors; required before dress().
  void finalize();

  static int level_bin(double point);
  static int lead_bucket(int lead);
  int max_lead() const { return max_lead_; }
  std::size_t count(int level_bin, int lead_bucket) const;

  struct Dressed {
    QuantileSet quantiles;
    bool fallback;
  };
  /// Quantiles yhat + error quantile (type-7 interpolation), clipped and rearranged.
  Dressed dress(double point, int lead, const std::vector<double>& levels) const;

 private:
  const std::vector<double>& bin(int level_bin, int lead_bucket) const;

  int max_lead_;
  std::size_t min_count_;
  std::vector<std::vector<double>> errors_;  // [bucket * kLevelBins + level]
  std::vector<std::vector<double>> pooled_;  // [bucket]
  bool finalized_ = true;
};

/// Type-7 sample quantile of `sorted` (ascending) at level alpha.
double empirical_quantile(const std::vector<double>& sorted, double alpha);

}  // namespace windcast::prob
