#include "windcast/core/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "windcast/core/error.hpp"

namespace windcast {

ZoneAggregation::ZoneAggregation(const SiteSet& originals, std::vector<Group> groups)
    : originals_(originals), groups_(std::move(groups)) {
  constexpr auto kUnmapped = std::numeric_limits<std::size_t>::max();
  target_.assign(originals_.size(), kUnmapped);
  weights_.assign(originals_.size(), 0.0);

  std::vector<std::string> ids;
  std::vector<double> caps;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto& [agg_id, members] = groups_[g];
    if (members.empty())
      throw std::invalid_argument(fmt::format("aggregate '{}' has no members", agg_id));
    double total = 0.0;
    for (const auto& member : members) {
      auto idx = originals_.index_of(member);
      if (!idx) throw DataError(fmt::format("unmapped zone id '{}'", member));
      if (target_[*idx] != kUnmapped)
        throw std::invalid_argument(fmt::format("zone '{}' mapped more than once", member));
      target_[*idx] = g;
      total += originals_.capacity(*idx);
    }
    for (const auto& member : members) {
      auto idx = *originals_.index_of(member);
      weights_[idx] = originals_.capacity(idx) / total;
    }
    ids.push_back(agg_id);
    caps.push_back(total);
  }
  for (std::size_t i = 0; i < originals_.size(); ++i)
    if (target_[i] == kUnmapped)
      throw DataError(fmt::format("unmapped zone id '{}'", originals_.id(i)));
  aggregates_ = SiteSet(std::move(ids), std::move(caps));
}

SpaceTimeSeries aggregate(const SpaceTimeSeries& series, const ZoneAggregation& agg) {
  const auto& in_sites = series.sites();
  const auto& originals = agg.originals();
  std::vector<std::size_t> original_of(in_sites.size());
  for (std::size_t s = 0; s < in_sites.size(); ++s) {
    auto idx = originals.index_of(in_sites.id(s));
    if (!idx) throw DataError(fmt::format("unmapped zone id '{}'", in_sites.id(s)));
    original_of[s] = *idx;
  }
  for (std::size_t o = 0; o < originals.size(); ++o)
    if (!in_sites.index_of(originals.id(o)))
      throw DataError(fmt::format("zone '{}' absent from series", originals.id(o)));

  const std::size_t m_out = agg.aggregates().size();
  const std::size_t m_in = in_sites.size();
  std::vector<double> values(series.num_times() * m_out, 0.0);
  std::vector<bool> missing(values.size(), false);
  for (std::size_t t = 0; t < series.num_times(); ++t) {
    for (std::size_t s = 0; s < m_in; ++s) {
      const auto o = original_of[s];
      const auto cell = t * m_out + agg.aggregate_of(o);
      if (series.missing(t, s))
        missing[cell] = true;
      else
        values[cell] += agg.weight(o) * series.value(t, s);
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (missing[i])
      values[i] = std::numeric_limits<double>::quiet_NaN();
    else
      values[i] = std::clamp(values[i], 0.0, 1.0);
  }
  return SpaceTimeSeries(agg.aggregates(), series.times(), std::move(values));
}

SiteSet western_denmark_control_zones() {
  std::vector<std::string> ids;
  for (int z = 1; z <= 15; ++z) ids.push_back(std::to_string(z));
  // MW per control zone, indexed by zone number - 1.
  std::vector<double> mw = {260, 260, 260, 140, 150, 150, 155, 140,
                            150, 145, 145, 125, 130, 145, 145};
  return SiteSet(std::move(ids), std::move(mw));
}

ZoneAggregation western_denmark_aggregation() {
  return ZoneAggregation(western_denmark_control_zones(),
                         {{"1", {"1", "2", "3"}},
                          {"2", {"5", "6", "7"}},
                          {"3", {"4", "8", "9"}},
                          {"4", {"10", "11", "14", "15"}},
                          {"5", {"12", "13"}}});
}

}  // namespace windcast
