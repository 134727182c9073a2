#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "windcast/copula/copula.hpp"
#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"

namespace windcast::copula {

void write_trajectories(std::ostream& out, const std::vector<TrajectorySet>& sets) {
  out << "origin,traj_id,site,lead_h,value\n";
  for (const auto& set : sets) {
    const auto stamp = format_utc(set.origin);
    for (std::size_t j = 0; j < set.size(); ++j)
      for (std::size_t s = 0; s < set.sites.size(); ++s)
        for (int k = 1; k <= set.leads; ++k)
          out << fmt::format("{},{},{},{},{}\n", stamp, j + 1, set.sites[s], k,
                             csv::fmt_double(set.value(j, s, k)));
  }
}

void write_trajectories(const std::filesystem::path& path, const std::vector<TrajectorySet>& sets) {
  auto out = csv::open_out(path);
  write_trajectories(out, sets);
}

std::vector<TrajectorySet> read_trajectories(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.empty()) throw DataError("empty trajectory file");
  const auto& h = rows[0];
  const auto c_origin = csv::column(h, "origin"), c_id = csv::column(h, "traj_id"),
             c_site = csv::column(h, "site"), c_lead = csv::column(h, "lead_h"),
             c_value = csv::column(h, "value");
  struct Pending {
    std::vector<std::string> sites;
    int leads = 0;
    std::map<long, std::map<std::pair<std::size_t, long>, double>> cells;
  };
  std::vector<TimePoint> order;
  std::map<TimePoint, Pending> by_origin;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != h.size()) throw DataError(fmt::format("trajectory row {}: wrong field count", r + 1));
    const auto origin = parse_utc(row[c_origin]);
    auto [it, inserted] = by_origin.try_emplace(origin);
    if (inserted) order.push_back(origin);
    auto& p = it->second;
    auto site_it = std::find(p.sites.begin(), p.sites.end(), row[c_site]);
    if (site_it == p.sites.end()) {
      p.sites.push_back(row[c_site]);
      site_it = p.sites.end() - 1;
    }
    const long lead = csv::parse_long(row[c_lead], "lead_h");
    if (lead < 1) throw DataError(fmt::format("trajectory row {}: lead must be >= 1", r + 1));
    p.leads = std::max(p.leads, static_cast<int>(lead));
    const double v = csv::parse_double(row[c_value], "value");
    if (!(v >= 0.0 && v <= 1.0)) throw DataError(fmt::format("trajectory row {}: value outside [0,1]", r + 1));
    p.cells[csv::parse_long(row[c_id], "traj_id")]
           [{static_cast<std::size_t>(site_it - p.sites.begin()), lead}] = v;
  }
  std::vector<TrajectorySet> out;
  for (auto origin : order) {
    auto& p = by_origin[origin];
    TrajectorySet set{origin, p.sites, p.leads, {}};
    const std::size_t dim = p.sites.size() * static_cast<std::size_t>(p.leads);
    for (auto& [id, cells] : p.cells) {
      if (cells.size() != dim)
        throw DataError(fmt::format("trajectory {} at {} is incomplete", id, format_utc(origin)));
      std::vector<double> path(dim);
      for (auto& [key, v] : cells)
        path[key.first * static_cast<std::size_t>(p.leads) + static_cast<std::size_t>(key.second - 1)] = v;
      set.paths.push_back(std::move(path));
    }
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<TrajectorySet> read_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return read_trajectories(in);
}

void write_covariance(std::ostream& out, const LatentCovariance& cov) {
  const auto& c = cov.matrix();
  out << "dim " << c.rows() << "\n";
  out << "smoothing " << csv::fmt_double(cov.smoothing()) << "\n";
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (j > 0) out << ' ';
      out << csv::fmt_double(c(i, j));
    }
    out << '\n';
  }
}

void write_covariance(const std::filesystem::path& path, const LatentCovariance& cov) {
  auto out = csv::open_out(path);
  write_covariance(out, cov);
}

LatentCovariance read_covariance(std::istream& in) {
  std::string key;
  long dim = 0;
  std::string smoothing_text;
  if (!(in >> key >> dim) || key != "dim" || dim < 1) throw DataError("covariance file: bad 'dim' header");
  if (!(in >> key >> smoothing_text) || key != "smoothing")
    throw DataError("covariance file: bad 'smoothing' header");
  const double smoothing = csv::parse_double(smoothing_text, "smoothing");
  Eigen::MatrixXd c(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) {
      std::string v;
      if (!(in >> v)) throw DataError("covariance file: truncated matrix");
      c(i, j) = csv::parse_double(v, "covariance entry");
    }
  try {
    return LatentCovariance(std::move(c), smoothing);
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("covariance file: {}", e.what()));
  }
}

LatentCovariance read_covariance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return read_covariance(in);
}

}  // namespace windcast::copula
