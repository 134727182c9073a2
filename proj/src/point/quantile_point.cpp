#include "windcast/point/quantile_point.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/error.hpp"

namespace windcast::point {

QuantilePointModel fit_quantile_point(const ModelSpec& spec, const SpaceTimeSeries& data,
                                      std::size_t site, const std::vector<double>& levels,
                                      const prob::QrOptions& options) {
  if (spec.family != ModelFamily::AR || spec.mode != HorizonMode::Direct)
    throw std::invalid_argument("quantile point models use the direct AR design");
  spec.validate();
  for (double a : levels)
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
  if (!std::is_sorted(levels.begin(), levels.end()))
    throw std::invalid_argument("quantile levels must be increasing");

  QuantilePointModel model{spec, data.sites().id(site), levels, {}};
  for (int k = 1; k <= spec.max_lead; ++k) {
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> ys;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < data.num_times(); ++t) {
      auto y = data.get(t + static_cast<std::size_t>(k), site);
      if (!y) continue;
      auto row = design_row(spec, {}, data, site, {}, t, k, nullptr);
      if (!row) continue;
      rows.push_back(row->x);
      ys.push_back(*y);
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(spec.parameter_count()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
      y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    auto qr = prob::fit_adaptive_qr(x, y, levels, options);
    model.coefficients.push_back(qr.coefficients());
  }
  return model;
}

std::vector<double> predict_quantile_point(const QuantilePointModel& model,
                                           const SpaceTimeSeries& history, std::size_t origin,
                                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
  auto it = std::find_if(model.levels.begin(), model.levels.end(),
                         [alpha](double a) { return std::abs(a - alpha) < 1e-12; });
  if (it == model.levels.end())
    throw std::invalid_argument(fmt::format("level {} was not fitted", alpha));
  const auto level = static_cast<std::size_t>(it - model.levels.begin());
  auto site = history.sites().index_of(model.site);
  if (!site) throw DataError(fmt::format("site '{}' absent from history", model.site));

  std::vector<double> out;
  for (int k = 1; k <= model.spec.max_lead; ++k) {
    auto row = design_row(model.spec, {}, history, *site, {}, origin, k, nullptr);
    if (!row) throw DataError("missing lag for quantile forecast");
    std::vector<double> q;
    for (const auto& b : model.coefficients[static_cast<std::size_t>(k - 1)])
      q.push_back(std::clamp(row->x.dot(b), 0.0, 1.0));
    std::sort(q.begin(), q.end());
    out.push_back(q[level]);
  }
  return out;
}

}  // namespace windcast::point
