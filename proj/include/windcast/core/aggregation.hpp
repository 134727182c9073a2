#pragma once

#include <string>
#include <utility>
#include <vector>

#include "windcast/core/series.hpp"

namespace windcast {

/// Mapping of original zones onto aggregated zones. Each original zone
/// contributes to its aggregate with its share of the aggregate capacity.
class ZoneAggregation {
 public:
  using Group = std::pair<std::string, std::vector<std::string>>;

  /// `groups` lists aggregate id -> member original ids, in output order.
  ZoneAggregation(const SiteSet& originals, std::vector<Group> groups);

  const SiteSet& originals() const { return originals_; }
  const SiteSet& aggregates() const { return aggregates_; }
  /// Aggregate index of original zone `i`.
  std::size_t aggregate_of(std::size_t original) const { return target_.at(original); }
  /// Capacity share of original zone `i` within its aggregate.
  double weight(std::size_t original) const { return weights_.at(original); }
  const std::vector<Group>& groups() const { return groups_; }

 private:
  SiteSet originals_;
  SiteSet aggregates_;
  std::vector<Group> groups_;
  std::vector<std::size_t> target_;
  std::vector<double> weights_;
};

/// Capacity-weighted mean of member zones; aggregate capacity is the member
/// sum. A missing member cell makes the aggregate cell missing.
SpaceTimeSeries aggregate(const SpaceTimeSeries& series, const ZoneAggregation& agg);

/// 15 control zones with a 2.5 GW total and capacities consistent with the
/// published aggregate shares (31/18/17/23/10 %). Synthetic per-zone split.
SiteSet western_denmark_control_zones();

/// The 15 -> 5 aggregation used for the Western Denmark layout.
ZoneAggregation western_denmark_aggregation();

}  // namespace windcast
