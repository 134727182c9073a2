#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "windcast/core/time.hpp"
#include "windcast/prob/predictive_cdf.hpp"

namespace windcast::prob {

/// Predictive CDF for one (origin, site, lead) cell.
struct MarginalForecast {
  TimePoint origin;
  std::string site;
  int lead;
  PredictiveCDF cdf;
};

/// Long format `origin,site,lead_h,alpha,quantile`. Quantile sets are written
/// at their own levels; other representations are inverted at `levels`.
void write_quantile_forecasts(std::ostream& out, const std::vector<MarginalForecast>& forecasts,
                              const std::vector<double>& levels = {});
void write_quantile_forecasts(const std::filesystem::path& path,
                              const std::vector<MarginalForecast>& forecasts,
                              const std::vector<double>& levels = {});
/// Rows sharing (origin, site, lead) form one QuantileSet, in file order.
std::vector<MarginalForecast> read_quantile_forecasts(std::istream& in);
std::vector<MarginalForecast> read_quantile_forecasts(const std::filesystem::path& path);

/// `origin,site,lead_h,family,mu,sigma,nu`; Beta stores its shapes a, b in mu, sigma.
void write_parametric_forecasts(std::ostream& out, const std::vector<MarginalForecast>& forecasts);
void write_parametric_forecasts(const std::filesystem::path& path,
                                const std::vector<MarginalForecast>& forecasts);
std::vector<MarginalForecast> read_parametric_forecasts(std::istream& in);
std::vector<MarginalForecast> read_parametric_forecasts(const std::filesystem::path& path);

}  // namespace windcast::prob
