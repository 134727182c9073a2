#pragma once

#include <vector>

#include <Eigen/Dense>

#include "windcast/point/model.hpp"
#include "windcast/prob/quantile_regression.hpp"

namespace windcast::point {

/// Linear quantile forecasts on the direct AR design (intercept plus lags),
/// one check-loss fit per lead and nominal level.
struct QuantilePointModel {
  ModelSpec spec;
  std::string site;
  std::vector<double> levels;
  std::vector<std::vector<Eigen::VectorXd>> coefficients;  // [lead - 1][level]
};

QuantilePointModel fit_quantile_point(const ModelSpec& spec, const SpaceTimeSeries& data,
                                      std::size_t site, const std::vector<double>& levels,
                                      const prob::QrOptions& options = {});

/// Forecast of the alpha-quantile per lead. Quantiles across the fitted levels
/// are rearranged per lead before selecting alpha, so they never cross.
std::vector<double> predict_quantile_point(const QuantilePointModel& model,
                                           const SpaceTimeSeries& history, std::size_t origin,
                                           double alpha);

}  // namespace windcast::point
