#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "windcast/core/time.hpp"

namespace windcast {

/// Ordered set of sites with their nominal capacities (MW).
class SiteSet {
 public:
  SiteSet() = default;
  SiteSet(std::vector<std::string> ids, std::vector<double> capacities);

  std::size_t size() const { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  double capacity(std::size_t i) const { return capacities_.at(i); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& capacities() const { return capacities_; }
  double total_capacity() const;
  std::optional<std::size_t> index_of(std::string_view id) const;

  bool operator==(const SiteSet&) const = default;

 private:
  std::vector<std::string> ids_;
  std::vector<double> capacities_;
};

/// Lead times t+1..t+n at a fixed hourly step from a forecast origin.
class LeadTimeSet {
 public:
  LeadTimeSet(TimePoint origin, int count, Hours step = Hours{1});

  TimePoint origin() const { return origin_; }
  int count() const { return count_; }
  Hours step() const { return step_; }
  /// Valid time of lead k (1-based).
  TimePoint at(int k) const;

 private:
  TimePoint origin_;
  int count_;
  Hours step_;
};

/// Normalized power y_{s,t} in [0,1] on an equispaced hourly grid, with an
/// explicit missing mask. Values are stored time-major (row = time stamp).
class SpaceTimeSeries {
 public:
  SpaceTimeSeries() = default;
  /// `values` is time-major with NaN marking a missing cell.
  SpaceTimeSeries(SiteSet sites, std::vector<TimePoint> times, std::vector<double> values);

  const SiteSet& sites() const { return sites_; }
  const std::vector<TimePoint>& times() const { return times_; }
  std::size_t num_times() const { return times_.size(); }
  std::size_t num_sites() const { return sites_.size(); }

  bool missing(std::size_t t, std::size_t s) const { return missing_[t * num_sites() + s] != 0; }
  /// Raw cell access; a missing cell reads as 0.
  double value(std::size_t t, std::size_t s) const { return values_[t * num_sites() + s]; }
  std::optional<double> get(std::size_t t, std::size_t s) const;
  std::size_t missing_count() const;

  /// Row of the given time stamp, if it lies on the grid.
  std::optional<std::size_t> index_of(TimePoint t) const;

  /// Column for one site with NaN in missing cells.
  std::vector<double> column(std::size_t s) const;

  /// Rows [first, first + count).
  SpaceTimeSeries slice(std::size_t first, std::size_t count) const;

 private:
  SiteSet sites_;
  std::vector<TimePoint> times_;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
};

/// Reads `timestamp,<site1>,<site2>,...` with MW values and normalizes each
/// column by its nominal capacity from `capacities`. The output keeps the
/// site order of `capacities`. Gaps in the hourly grid become missing rows;
/// empty fields and "NA" are missing cells.
SpaceTimeSeries load_series(std::istream& in, const SiteSet& capacities);
SpaceTimeSeries load_series(const std::filesystem::path& path, const SiteSet& capacities);

/// Writes the same schema. With `in_mw` the values are scaled back by capacity.
void write_series(std::ostream& out, const SpaceTimeSeries& series, bool in_mw = false);
void write_series(const std::filesystem::path& path, const SpaceTimeSeries& series,
                  bool in_mw = false);

/// Site-major flattening of the m x n forecast target: index = s * n + (k - 1).
class MultivariateTarget {
 public:
  MultivariateTarget(SiteSet sites, LeadTimeSet leads);

  const SiteSet& sites() const { return sites_; }
  const LeadTimeSet& leads() const { return leads_; }
  std::size_t num_sites() const { return sites_.size(); }
  int num_leads() const { return leads_.count(); }
  std::size_t dim() const { return sites_.size() * static_cast<std::size_t>(leads_.count()); }

  std::size_t flat_index(std::size_t site, int lead) const;
  struct Cell {
    std::size_t site;
    int lead;
  };
  Cell cell(std::size_t flat) const;

 private:
  SiteSet sites_;
  LeadTimeSet leads_;
};

/// Observed window y_{s,t+k} for every (site, lead) of `target`, site-major.
/// Throws DataError when a lead falls outside the series or a cell is missing.
std::vector<double> flatten(const MultivariateTarget& target, const SpaceTimeSeries& series);

/// Site-major vector -> m rows of n values.
std::vector<std::vector<double>> unflatten(const MultivariateTarget& target,
                                           std::span<const double> flat);
std::vector<double> flatten(const MultivariateTarget& target,
                            const std::vector<std::vector<double>>& grid);

}  // namespace windcast
