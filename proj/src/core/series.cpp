#include "windcast/core/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"

namespace windcast {

namespace {
constexpr double kCapacityTolerance = 1e-9;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

SiteSet::SiteSet(std::vector<std::string> ids, std::vector<double> capacities)
    : ids_(std::move(ids)), capacities_(std::move(capacities)) {
  if (ids_.empty()) throw std::invalid_argument("site set must contain at least one site");
  if (ids_.size() != capacities_.size())
    throw std::invalid_argument("one capacity per site required");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) throw std::invalid_argument("empty site id");
    if (!seen.insert(ids_[i]).second)
      throw std::invalid_argument(fmt::format("duplicate site id '{}'", ids_[i]));
    if (!(capacities_[i] > 0.0) || !std::isfinite(capacities_[i]))
      throw std::invalid_argument(fmt::format("capacity of site '{}' must be positive", ids_[i]));
  }
}

double SiteSet::total_capacity() const {
  return std::accumulate(capacities_.begin(), capacities_.end(), 0.0);
}

std::optional<std::size_t> SiteSet::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return i;
  return std::nullopt;
}

LeadTimeSet::LeadTimeSet(TimePoint origin, int count, Hours step)
    : origin_(origin), count_(count), step_(step) {
  if (count < 1) throw std::invalid_argument("lead time set needs n >= 1");
  if (step.count() < 1) throw std::invalid_argument("lead step must be positive");
}

TimePoint LeadTimeSet::at(int k) const {
  if (k < 1 || k > count_) throw std::out_of_range(fmt::format("lead {} outside 1..{}", k, count_));
  return origin_ + step_ * k;
}

SpaceTimeSeries::SpaceTimeSeries(SiteSet sites, std::vector<TimePoint> times,
                                 std::vector<double> values)
    : sites_(std::move(sites)), times_(std::move(times)), values_(std::move(values)) {
  const std::size_t m = sites_.size();
  if (values_.size() != times_.size() * m)
    throw std::invalid_argument("value matrix does not match times x sites");
  for (std::size_t t = 1; t < times_.size(); ++t) {
    if (times_[t] - times_[t - 1] != Hours{1})
      throw DataError("series timestamps must be strictly increasing at hourly spacing");
  }
  missing_.assign(values_.size(), 0);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double v = values_[i];
    if (std::isnan(v)) {
      missing_[i] = 1;
      values_[i] = 0.0;
    } else if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError(fmt::format("normalized value {} outside [0,1] at row {}, site '{}'", v,
                                  i / m, sites_.id(i % m)));
    }
  }
}

std::optional<double> SpaceTimeSeries::get(std::size_t t, std::size_t s) const {
  if (missing(t, s)) return std::nullopt;
  return value(t, s);
}

std::size_t SpaceTimeSeries::missing_count() const {
  return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), 1));
}

std::optional<std::size_t> SpaceTimeSeries::index_of(TimePoint t) const {
  if (times_.empty() || t < times_.front() || t > times_.back()) return std::nullopt;
  auto offset = hours_between(times_.front(), t);
  if (times_.front() + Hours{offset} != t) return std::nullopt;
  return static_cast<std::size_t>(offset);
}

std::vector<double> SpaceTimeSeries::column(std::size_t s) const {
  std::vector<double> out(num_times());
  for (std::size_t t = 0; t < num_times(); ++t) out[t] = missing(t, s) ? kNaN : value(t, s);
  return out;
}

SpaceTimeSeries SpaceTimeSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > num_times()) throw std::out_of_range("slice beyond series end");
  const std::size_t m = num_sites();
  std::vector<TimePoint> times(times_.begin() + first, times_.begin() + first + count);
  std::vector<double> values(count * m);
  for (std::size_t t = 0; t < count; ++t)
    for (std::size_t s = 0; s < m; ++s)
      values[t * m + s] = missing(first + t, s) ? kNaN : value(first + t, s);
  return SpaceTimeSeries(sites_, std::move(times), std::move(values));
}

SpaceTimeSeries load_series(std::istream& in, const SiteSet& capacities) {
  auto rows = csv::read_rows(in);
  if (rows.empty()) throw DataError("series file is empty");
  const auto& header = rows.front();
  if (header.empty() || header[0] != "timestamp")
    throw DataError("series header must start with 'timestamp'");

  const std::size_t m = capacities.size();
  std::vector<std::size_t> column_of(m);
  std::vector<bool> used(header.size(), false);
  for (std::size_t s = 0; s < m; ++s) {
    auto it = std::find(header.begin() + 1, header.end(), capacities.id(s));
    if (it == header.end())
      throw DataError(fmt::format("capacity mismatch: site '{}' has no column", capacities.id(s)));
    column_of[s] = static_cast<std::size_t>(it - header.begin());
    used[column_of[s]] = true;
  }
  for (std::size_t c = 1; c < header.size(); ++c)
    if (!used[c])
      throw DataError(fmt::format("capacity mismatch: column '{}' has no capacity", header[c]));

  std::vector<TimePoint> stamps;
  stamps.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw DataError(fmt::format("row {} has {} fields, expected {}", r + 1, rows[r].size(),
                                  header.size()));
    TimePoint t = parse_utc(rows[r][0]);
    if (t != std::chrono::floor<Hours>(t))
      throw DataError(fmt::format("timestamp '{}' is not on the hourly grid", rows[r][0]));
    if (!stamps.empty() && t <= stamps.back())
      throw DataError(fmt::format("non-monotone time at row {}", r + 1));
    stamps.push_back(t);
  }
  if (stamps.empty()) throw DataError("series file has no data rows");

  const auto span = static_cast<std::size_t>(hours_between(stamps.front(), stamps.back())) + 1;
  std::vector<TimePoint> grid(span);
  for (std::size_t i = 0; i < span; ++i) grid[i] = stamps.front() + Hours{static_cast<long>(i)};
  std::vector<double> values(span * m, kNaN);

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto slot = static_cast<std::size_t>(hours_between(stamps.front(), stamps[r - 1]));
    for (std::size_t s = 0; s < m; ++s) {
      const std::string& field = rows[r][column_of[s]];
      if (field.empty() || field == "NA") continue;
      double raw = csv::parse_double(field, capacities.id(s));
      double cap = capacities.capacity(s);
      if (raw < 0.0)
        throw DataError(fmt::format("negative power {} at row {}, site '{}'", raw, r + 1,
                                    capacities.id(s)));
      if (raw > cap * (1.0 + kCapacityTolerance))
        throw DataError(fmt::format("value {} exceeds nominal capacity {} at row {}, site '{}'",
                                    raw, cap, r + 1, capacities.id(s)));
      values[slot * m + s] = std::min(raw / cap, 1.0);
    }
  }
  return SpaceTimeSeries(capacities, std::move(grid), std::move(values));
}

SpaceTimeSeries load_series(const std::filesystem::path& path, const SiteSet& capacities) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open series file '{}'", path.string()));
  return load_series(in, capacities);
}

void write_series(std::ostream& out, const SpaceTimeSeries& series, bool in_mw) {
  const auto& sites = series.sites();
  out << "timestamp";
  for (const auto& id : sites.ids()) out << ',' << id;
  out << '\n';
  for (std::size_t t = 0; t < series.num_times(); ++t) {
    out << format_utc(series.times()[t]);
    for (std::size_t s = 0; s < sites.size(); ++s) {
      out << ',';
      if (series.missing(t, s)) continue;
      double v = series.value(t, s);
      out << csv::fmt_double(in_mw ? v * sites.capacity(s) : v);
    }
    out << '\n';
  }
}

void write_series(const std::filesystem::path& path, const SpaceTimeSeries& series, bool in_mw) {
  auto out = csv::open_out(path);
  write_series(out, series, in_mw);
}

MultivariateTarget::MultivariateTarget(SiteSet sites, LeadTimeSet leads)
    : sites_(std::move(sites)), leads_(leads) {}

std::size_t MultivariateTarget::flat_index(std::size_t site, int lead) const {
  if (site >= num_sites() || lead < 1 || lead > num_leads())
    throw std::out_of_range("cell outside the target layout");
  return site * static_cast<std::size_t>(num_leads()) + static_cast<std::size_t>(lead - 1);
}

MultivariateTarget::Cell MultivariateTarget::cell(std::size_t flat) const {
  if (flat >= dim()) throw std::out_of_range("flat index outside the target layout");
  const auto n = static_cast<std::size_t>(num_leads());
  return {flat / n, static_cast<int>(flat % n) + 1};
}

std::vector<double> flatten(const MultivariateTarget& target, const SpaceTimeSeries& series) {
  if (!(series.sites() == target.sites()))
    throw std::invalid_argument("series sites differ from target sites");
  std::vector<double> out(target.dim());
  for (int k = 1; k <= target.num_leads(); ++k) {
    auto row = series.index_of(target.leads().at(k));
    if (!row)
      throw DataError(fmt::format("lead {} ({}) not covered by the series window", k,
                                  format_utc(target.leads().at(k))));
    for (std::size_t s = 0; s < target.num_sites(); ++s) {
      if (series.missing(*row, s))
        throw DataError(fmt::format("missing cell in window: site '{}', lead {}",
                                    target.sites().id(s), k));
      out[target.flat_index(s, k)] = series.value(*row, s);
    }
  }
  return out;
}

std::vector<std::vector<double>> unflatten(const MultivariateTarget& target,
                                           std::span<const double> flat) {
  if (flat.size() != target.dim()) throw std::invalid_argument("flat vector has wrong dimension");
  const auto n = static_cast<std::size_t>(target.num_leads());
  std::vector<std::vector<double>> grid(target.num_sites(), std::vector<double>(n));
  for (std::size_t s = 0; s < target.num_sites(); ++s)
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(s * n), n, grid[s].begin());
  return grid;
}

std::vector<double> flatten(const MultivariateTarget& target,
                            const std::vector<std::vector<double>>& grid) {
  const auto n = static_cast<std::size_t>(target.num_leads());
  if (grid.size() != target.num_sites()) throw std::invalid_argument("grid has wrong site count");
  std::vector<double> out;
  out.reserve(target.dim());
  for (const auto& row : grid) {
    if (row.size() != n) throw std::invalid_argument("grid row has wrong lead count");
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace windcast
