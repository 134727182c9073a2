#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "windcast/core/series.hpp"
#include "windcast/point/nwp.hpp"
#include "windcast/point/power_fit.hpp"

namespace windcast::point {

enum class ModelFamily { AR, TAR, RST, CPAR, CPARX };
enum class HorizonMode { Iterated, Direct };

std::string_view family_name(ModelFamily f);
ModelFamily parse_model_family(std::string_view name);
std::string_view mode_name(HorizonMode m);
HorizonMode parse_horizon_mode(std::string_view name);

/// Observable driving regime switches or coefficient functions.
enum class Covariate {
  LastPower,     // y_{s,t}
  NwpDirection,  // forecast direction for the target hour, degrees (periodic)
  NwpSpeed,      // forecast speed for the target hour, m/s
};
std::string_view covariate_name(Covariate c);
Covariate parse_covariate(std::string_view name);

/// Threshold rule: regime r when thresholds[r-1] <= x < thresholds[r].
struct RegimeRule {
  Covariate covariate = Covariate::LastPower;
  std::vector<double> thresholds;  // strictly increasing; empty means one regime

  int regimes() const { return static_cast<int>(thresholds.size()) + 1; }
  int regime_of(double x) const;
};

struct OffsiteTerm {
  std::string site;
  std::vector<int> lags = {1, 2};
};

/// Grid for conditional-parametric coefficient functions.
struct CovariateGrid {
  Covariate covariate = Covariate::NwpDirection;
  int nodes = 8;
  double lo = 0.0;   // ignored for direction (periodic on [0, 360))
  double hi = 25.0;
  /// Triangular kernel half-width in covariate units; infinity gives uniform weights.
  double bandwidth = 67.5;

  bool periodic() const { return covariate == Covariate::NwpDirection; }
  double node(int i) const;
  /// Interpolation weights: (lower node, upper node, fraction toward upper).
  struct Position {
    int lower;
    int upper;
    double frac;
  };
  Position locate(double x) const;
  double distance(double x, int node_index) const;
};

struct ModelSpec {
  ModelFamily family = ModelFamily::AR;
  std::vector<int> lags = {1};
  HorizonMode mode = HorizonMode::Direct;
  int max_lead = 43;
  RegimeRule regime;                 // TAR and RST
  std::vector<OffsiteTerm> offsite;  // RST
  CovariateGrid grid;                // CPAR and CPARX
  int lead_bucket_hours = 6;         // CPARX power-curve buckets

  void validate() const;
  bool needs_nwp() const;
  std::size_t parameter_count() const;
};

/// Coefficients for one lead (or the one-step model in iterated mode).
struct LeadModel {
  /// One coefficient vector per regime (TAR/RST) or per grid node (CP), else one.
  std::vector<Eigen::VectorXd> coefficients;
  std::vector<double> sigma;  // per part; CP models carry a single value
  double rmse = 0.0;
  std::size_t rows = 0;
};

struct FittedModel {
  ModelSpec spec;
  std::string site;
  std::vector<LeadModel> leads;  // size 1 in iterated mode, else max_lead
  std::vector<LogisticCurve> power_curves;  // CPARX, one per lead bucket
  double in_sample_rmse = 0.0;

  const LeadModel& lead_model(int lead) const;
  /// Noise sd of the model used for `lead` (mean over parts).
  double noise_sd(int lead) const;
};

/// Batch least squares: per regime for TAR/RST, per grid node with triangular
/// kernel weights for CP models. Training origins are every row of `data` with
/// complete lags, target and (when required) an NWP run.
FittedModel fit(const ModelSpec& spec, const SpaceTimeSeries& data, std::size_t site,
                const NwpArchive* nwp = nullptr);

struct RecursiveFit {
  FittedModel model;
  /// Per lead slot and part, the coefficient path over training rows.
  std::vector<std::vector<std::vector<Eigen::VectorXd>>> history;
};

/// Exponentially forgetting recursive least squares over the same designs as
/// fit(). CP nodes use their kernel weights as row weights.
RecursiveFit fit_recursive(const ModelSpec& spec, const SpaceTimeSeries& data, std::size_t site,
                           double forgetting, const NwpArchive* nwp = nullptr,
                           std::size_t initial_window = 0);

/// Conditional-expectation forecasts for leads 1..max_lead issued at row
/// `origin` of `history`, clipped to [0,1].
std::vector<double> predict_point(const FittedModel& model, const SpaceTimeSeries& history,
                                  std::size_t origin, const NwpForecast* nwp = nullptr);

/// y_{t+k|t} = y_t for k = 1..leads.
std::vector<double> persistence(const SpaceTimeSeries& history, std::size_t site,
                                std::size_t origin, int leads);

/// Regressor row for (origin, lead) or nullopt when an input is unavailable.
/// Exposed for quantile variants sharing the point-model designs.
struct DesignRow {
  Eigen::VectorXd x;
  double covariate;
};
std::optional<DesignRow> design_row(const ModelSpec& spec, const std::vector<LogisticCurve>& curves,
                                    const SpaceTimeSeries& series, std::size_t site,
                                    const std::vector<std::size_t>& offsite_sites,
                                    std::size_t origin, int lead, const NwpForecast* nwp);

}  // namespace windcast::point
