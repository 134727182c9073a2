#include "windcast/point/nwp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"

namespace windcast::point {

double NwpForecast::speed(int lead) const {
  const auto i = static_cast<std::size_t>(lead - 1);
  return std::hypot(u.at(i), v.at(i));
}

double NwpForecast::direction_deg(int lead) const {
  const auto i = static_cast<std::size_t>(lead - 1);
  double d = std::atan2(u.at(i), v.at(i)) * 180.0 / std::numbers::pi;
  if (d < 0.0) d += 360.0;
  return d >= 360.0 ? 0.0 : d;
}

NwpArchive::NwpArchive(std::vector<NwpForecast> runs) : runs_(std::move(runs)) {
  std::sort(runs_.begin(), runs_.end(),
            [](const auto& a, const auto& b) { return a.origin < b.origin; });
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (runs_[i].u.size() != runs_[i].v.size())
      throw DataError("NWP run has unequal u and v lengths");
    if (i > 0 && runs_[i].origin == runs_[i - 1].origin)
      throw DataError(fmt::format("duplicate NWP origin {}", format_utc(runs_[i].origin)));
  }
}

const NwpForecast* NwpArchive::find(TimePoint origin) const {
  auto it = std::lower_bound(runs_.begin(), runs_.end(), origin,
                             [](const NwpForecast& r, TimePoint t) { return r.origin < t; });
  if (it == runs_.end() || it->origin != origin) return nullptr;
  return &*it;
}

NwpArchive read_nwp(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.empty()) throw DataError("empty NWP file");
  const auto& h = rows[0];
  const auto c_origin = csv::column(h, "origin"), c_lead = csv::column(h, "lead_h"),
             c_u = csv::column(h, "u"), c_v = csv::column(h, "v");
  std::map<TimePoint, std::map<long, std::pair<double, double>>> grouped;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != h.size()) throw DataError(fmt::format("NWP row {}: wrong field count", r + 1));
    const long lead = csv::parse_long(row[c_lead], "lead_h");
    if (lead < 1) throw DataError(fmt::format("NWP row {}: lead must be >= 1", r + 1));
    grouped[parse_utc(row[c_origin])][lead] = {csv::parse_double(row[c_u], "u"),
                                              csv::parse_double(row[c_v], "v")};
  }
  std::vector<NwpForecast> runs;
  for (const auto& [origin, leads] : grouped) {
    NwpForecast run{origin, {}, {}};
    long expect = 1;
    for (const auto& [lead, uv] : leads) {
      if (lead != expect++)
        throw DataError(fmt::format("NWP run {} has non-consecutive leads", format_utc(origin)));
      run.u.push_back(uv.first);
      run.v.push_back(uv.second);
    }
    runs.push_back(std::move(run));
  }
  return NwpArchive(std::move(runs));
}

NwpArchive read_nwp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return read_nwp(in);
}

void write_nwp(std::ostream& out, const NwpArchive& archive) {
  out << "origin,lead_h,u,v\n";
  for (const auto& run : archive.runs()) {
    const auto stamp = format_utc(run.origin);
    for (int k = 1; k <= run.horizon(); ++k)
      out << fmt::format("{},{},{},{}\n", stamp, k,
                         csv::fmt_double(run.u[static_cast<std::size_t>(k - 1)]),
                         csv::fmt_double(run.v[static_cast<std::size_t>(k - 1)]));
  }
}

void write_nwp(const std::filesystem::path& path, const NwpArchive& archive) {
  auto out = csv::open_out(path);
  write_nwp(out, archive);
}

}  // namespace windcast::point
