#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "windcast/core/time.hpp"

namespace windcast::point {

/// Forecast wind components for leads 1..n issued at one origin.
struct NwpForecast {
  TimePoint origin;
  std::vector<double> u;  // m/s, index lead - 1
  std::vector<double> v;

  int horizon() const { return static_cast<int>(u.size()); }
  double speed(int lead) const;
  /// Direction the wind vector points to, degrees in [0, 360).
  double direction_deg(int lead) const;
};

/// All NWP runs for one site, ordered by origin.
class NwpArchive {
 public:
  NwpArchive() = default;
  explicit NwpArchive(std::vector<NwpForecast> runs);

  const std::vector<NwpForecast>& runs() const { return runs_; }
  const NwpForecast* find(TimePoint origin) const;
  bool empty() const { return runs_.empty(); }

 private:
  std::vector<NwpForecast> runs_;
};

/// CSV `origin,lead_h,u,v`, one file per site.
NwpArchive read_nwp(std::istream& in);
NwpArchive read_nwp(const std::filesystem::path& path);
void write_nwp(std::ostream& out, const NwpArchive& archive);
void write_nwp(const std::filesystem::path& path, const NwpArchive& archive);

}  // namespace windcast::point
