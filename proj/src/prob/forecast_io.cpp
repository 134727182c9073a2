#include "windcast/prob/forecast_io.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"

namespace windcast::prob {

using csv::fmt_double;

void write_quantile_forecasts(std::ostream& out, const std::vector<MarginalForecast>& forecasts,
                              const std::vector<double>& levels) {
  out << "origin,site,lead_h,alpha,quantile\n";
  for (const auto& f : forecasts) {
    const auto stamp = format_utc(f.origin);
    auto row = [&](double a, double q) {
      out << fmt::format("{},{},{},{},{}\n", stamp, f.site, f.lead, fmt_double(a), fmt_double(q));
    };
    if (auto* qs = std::get_if<QuantileSet>(&f.cdf)) {
      for (std::size_t i = 0; i < qs->levels().size(); ++i) row(qs->levels()[i], qs->values()[i]);
    } else {
      if (levels.empty()) throw std::invalid_argument("levels required to export a non-quantile CDF");
      for (double a : levels) row(a, cdf_inverse(f.cdf, a));
    }
  }
}

void write_quantile_forecasts(const std::filesystem::path& path,
                              const std::vector<MarginalForecast>& forecasts,
                              const std::vector<double>& levels) {
  auto out = csv::open_out(path);
  write_quantile_forecasts(out, forecasts, levels);
}

std::vector<MarginalForecast> read_quantile_forecasts(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.empty()) throw DataError("empty quantile forecast file");
  const auto& h = rows[0];
  const auto c_origin = csv::column(h, "origin"), c_site = csv::column(h, "site"),
             c_lead = csv::column(h, "lead_h"), c_alpha = csv::column(h, "alpha"),
             c_q = csv::column(h, "quantile");
  std::vector<MarginalForecast> out;
  std::vector<double> levels, values;
  TimePoint origin{};
  std::string site;
  long lead = -1;
  auto flush = [&] {
    if (levels.empty()) return;
    try {
      out.push_back({origin, site, static_cast<int>(lead), QuantileSet(levels, values)});
    } catch (const std::invalid_argument& e) {
      throw DataError(fmt::format("quantile file, origin {}, site {}, lead {}: {}", format_utc(origin),
                                  site, lead, e.what()));
    }
    levels.clear();
    values.clear();
  };
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != h.size()) throw DataError(fmt::format("quantile file row {}: wrong field count", r + 1));
    const auto o = parse_utc(row[c_origin]);
    const auto l = csv::parse_long(row[c_lead], "lead_h");
    if (o != origin || row[c_site] != site || l != lead) {
      flush();
      origin = o;
      site = row[c_site];
      lead = l;
    }
    levels.push_back(csv::parse_double(row[c_alpha], "alpha"));
    values.push_back(csv::parse_double(row[c_q], "quantile"));
  }
  flush();
  return out;
}

std::vector<MarginalForecast> read_quantile_forecasts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return read_quantile_forecasts(in);
}

void write_parametric_forecasts(std::ostream& out, const std::vector<MarginalForecast>& forecasts) {
  out << "origin,site,lead_h,family,mu,sigma,nu\n";
  for (const auto& f : forecasts) {
    const auto* p = std::get_if<ParametricDensity>(&f.cdf);
    if (!p) throw std::invalid_argument("parametric export needs parametric forecasts");
    out << fmt::format("{},{},{},{},{},{},{}\n", format_utc(f.origin), f.site, f.lead,
                       family_name(p->family()), fmt_double(p->mu()), fmt_double(p->sigma()),
                       fmt_double(p->nu()));
  }
}

void write_parametric_forecasts(const std::filesystem::path& path,
                                const std::vector<MarginalForecast>& forecasts) {
  auto out = csv::open_out(path);
  write_parametric_forecasts(out, forecasts);
}

std::vector<MarginalForecast> read_parametric_forecasts(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.empty()) throw DataError("empty parametric forecast file");
  const auto& h = rows[0];
  const auto c_origin = csv::column(h, "origin"), c_site = csv::column(h, "site"),
             c_lead = csv::column(h, "lead_h"), c_family = csv::column(h, "family"),
             c_mu = csv::column(h, "mu"), c_sigma = csv::column(h, "sigma"),
             c_nu = csv::column(h, "nu");
  std::vector<MarginalForecast> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != h.size()) throw DataError(fmt::format("parametric file row {}: wrong field count", r + 1));
    Family family;
    try {
      family = parse_family(row[c_family]);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
    const double mu = csv::parse_double(row[c_mu], "mu");
    const double sigma = csv::parse_double(row[c_sigma], "sigma");
    const double nu = csv::parse_double(row[c_nu], "nu");
    auto density = [&]() -> ParametricDensity {
      switch (family) {
        case Family::TruncatedGaussian: return ParametricDensity::truncated_gaussian(mu, sigma);
        case Family::CensoredGaussian: return ParametricDensity::censored_gaussian(mu, sigma);
        case Family::GeneralizedLogitNormal:
          return ParametricDensity::generalized_logit_normal(mu, sigma, nu);
        case Family::Beta: return ParametricDensity::beta(mu, sigma);
      }
      throw DataError("unknown family");
    };
    try {
      out.push_back({parse_utc(row[c_origin]), row[c_site],
                     static_cast<int>(csv::parse_long(row[c_lead], "lead_h")), density()});
    } catch (const std::invalid_argument& e) {
      throw DataError(fmt::format("parametric file row {}: {}", r + 1, e.what()));
    }
  }
  return out;
}

std::vector<MarginalForecast> read_parametric_forecasts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return read_parametric_forecasts(in);
}

}  // namespace windcast::prob
