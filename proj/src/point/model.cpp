#include "windcast/point/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/error.hpp"
#include "windcast/point/least_squares.hpp"

namespace windcast::point {

std::string_view family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::AR: return "ar";
    case ModelFamily::TAR: return "tar";
    case ModelFamily::RST: return "rst";
    case ModelFamily::CPAR: return "cpar";
    case ModelFamily::CPARX: return "cparx";
  }
  return "?";
}

ModelFamily parse_model_family(std::string_view name) {
  for (auto f : {ModelFamily::AR, ModelFamily::TAR, ModelFamily::RST, ModelFamily::CPAR,
                 ModelFamily::CPARX})
    if (family_name(f) == name) return f;
  throw std::invalid_argument(fmt::format("unknown model family '{}'", name));
}

std::string_view mode_name(HorizonMode m) { return m == HorizonMode::Direct ? "direct" : "iterated"; }

HorizonMode parse_horizon_mode(std::string_view name) {
  if (name == "direct") return HorizonMode::Direct;
  if (name == "iterated") return HorizonMode::Iterated;
  throw std::invalid_argument(fmt::format("unknown horizon mode '{}'", name));
}

std::string_view covariate_name(Covariate c) {
  switch (c) {
    case Covariate::LastPower: return "last-power";
    case Covariate::NwpDirection: return "nwp-direction";
    case Covariate::NwpSpeed: return "nwp-speed";
  }
  return "?";
}

Covariate parse_covariate(std::string_view name) {
  for (auto c : {Covariate::LastPower, Covariate::NwpDirection, Covariate::NwpSpeed})
    if (covariate_name(c) == name) return c;
  throw std::invalid_argument(fmt::format("unknown covariate '{}'", name));
}

int RegimeRule::regime_of(double x) const {
  return static_cast<int>(std::upper_bound(thresholds.begin(), thresholds.end(), x) -
                          thresholds.begin());
}

double CovariateGrid::node(int i) const {
  if (periodic()) return 360.0 * i / nodes;
  return lo + (hi - lo) * i / (nodes - 1);
}

CovariateGrid::Position CovariateGrid::locate(double x) const {
  if (periodic()) {
    double u = std::fmod(x, 360.0);
    if (u < 0.0) u += 360.0;
    u = u / 360.0 * nodes;
    int i = std::min(static_cast<int>(u), nodes - 1);
    return {i, (i + 1) % nodes, u - i};
  }
  const double c = std::clamp(x, lo, hi);
  const double u = (c - lo) / (hi - lo) * (nodes - 1);
  int i = std::min(static_cast<int>(u), nodes - 2);
  return {i, i + 1, u - i};
}

double CovariateGrid::distance(double x, int node_index) const {
  if (periodic()) {
    double d = std::abs(std::fmod(x - node(node_index), 360.0));
    return std::min(d, 360.0 - d);
  }
  return std::abs(std::clamp(x, lo, hi) - node(node_index));
}

namespace {

bool is_cp(ModelFamily f) { return f == ModelFamily::CPAR || f == ModelFamily::CPARX; }
bool is_regime(ModelFamily f) { return f == ModelFamily::TAR || f == ModelFamily::RST; }

Covariate driving_covariate(const ModelSpec& spec) {
  if (is_cp(spec.family)) return spec.grid.covariate;
  return spec.regime.covariate;
}

bool uses_covariate(const ModelSpec& spec) {
  return is_cp(spec.family) || (is_regime(spec.family) && !spec.regime.thresholds.empty());
}

// Value of site `s` at lag i (1 = origin) as seen from the row building the design.
using LagFn = std::function<std::optional<double>(std::size_t s, int lag)>;

std::optional<DesignRow> build_row(const ModelSpec& spec, const std::vector<LogisticCurve>& curves,
                                   std::size_t site, const std::vector<std::size_t>& offsite,
                                   const LagFn& lag, TimePoint target_time, int lead,
                                   const NwpForecast* nwp) {
  const bool nwp_needed = spec.needs_nwp();
  if (nwp_needed && (!nwp || nwp->horizon() < lead)) return std::nullopt;

  DesignRow row{Eigen::VectorXd(static_cast<Eigen::Index>(spec.parameter_count())), 0.0};
  Eigen::Index c = 0;
  if (spec.family == ModelFamily::CPARX) {
    const double h = 2.0 * std::numbers::pi * hour_of_day(target_time) / 24.0;
    row.x(c++) = std::cos(h);
    row.x(c++) = std::sin(h);
  } else {
    row.x(c++) = 1.0;
  }
  for (int l : spec.lags) {
    auto v = lag(site, l);
    if (!v) return std::nullopt;
    row.x(c++) = *v;
  }
  if (spec.family == ModelFamily::RST) {
    for (std::size_t j = 0; j < spec.offsite.size(); ++j)
      for (int l : spec.offsite[j].lags) {
        auto v = lag(offsite[j], l);
        if (!v) return std::nullopt;
        row.x(c++) = *v;
      }
  }
  if (spec.family == ModelFamily::CPARX) {
    const auto bucket = static_cast<std::size_t>((lead - 1) / spec.lead_bucket_hours);
    row.x(c++) = curves.at(bucket)(nwp->speed(lead));
  }
  if (uses_covariate(spec)) {
    switch (driving_covariate(spec)) {
      case Covariate::LastPower: {
        auto v = lag(site, 1);
        if (!v) return std::nullopt;
        row.covariate = *v;
        break;
      }
      case Covariate::NwpDirection: row.covariate = nwp->direction_deg(lead); break;
      case Covariate::NwpSpeed: row.covariate = nwp->speed(lead); break;
    }
  }
  return row;
}

LagFn series_lags(const SpaceTimeSeries& series, std::size_t origin) {
  return [&series, origin](std::size_t s, int lag) -> std::optional<double> {
    if (static_cast<std::size_t>(lag - 1) > origin) return std::nullopt;
    return series.get(origin + 1 - static_cast<std::size_t>(lag), s);
  };
}

double cp_predict(const ModelSpec& spec, const LeadModel& lm, const DesignRow& row) {
  const auto pos = spec.grid.locate(row.covariate);
  const auto& lo = lm.coefficients[static_cast<std::size_t>(pos.lower)];
  const auto& hi = lm.coefficients[static_cast<std::size_t>(pos.upper)];
  return (1.0 - pos.frac) * row.x.dot(lo) + pos.frac * row.x.dot(hi);
}

double part_predict(const ModelSpec& spec, const LeadModel& lm, const DesignRow& row) {
  if (is_cp(spec.family)) return cp_predict(spec, lm, row);
  if (is_regime(spec.family))
    return row.x.dot(lm.coefficients[static_cast<std::size_t>(spec.regime.regime_of(row.covariate))]);
  return row.x.dot(lm.coefficients[0]);
}

std::vector<std::size_t> resolve_offsite(const ModelSpec& spec, const SiteSet& sites) {
  std::vector<std::size_t> out;
  if (spec.family != ModelFamily::RST) return out;
  for (const auto& term : spec.offsite) {
    auto idx = sites.index_of(term.site);
    if (!idx) throw DataError(fmt::format("off-site location '{}' not in the site set", term.site));
    out.push_back(*idx);
  }
  return out;
}

struct Training {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<double> covariate;
};

Training gather(const ModelSpec& spec, const std::vector<LogisticCurve>& curves,
                const SpaceTimeSeries& data, std::size_t site,
                const std::vector<std::size_t>& offsite, const NwpArchive* nwp, int lead) {
  std::vector<DesignRow> rows;
  std::vector<double> ys;
  const auto n = data.num_times();
  for (std::size_t t = 0; t + static_cast<std::size_t>(lead) < n; ++t) {
    auto target = data.get(t + static_cast<std::size_t>(lead), site);
    if (!target) continue;
    const NwpForecast* run = nwp ? nwp->find(data.times()[t]) : nullptr;
    auto row = build_row(spec, curves, site, offsite, series_lags(data, t),
                         data.times()[t] + Hours{lead}, lead, run);
    if (!row) continue;
    rows.push_back(std::move(*row));
    ys.push_back(*target);
  }
  Training tr;
  const auto p = static_cast<Eigen::Index>(spec.parameter_count());
  tr.x.resize(static_cast<Eigen::Index>(rows.size()), p);
  tr.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    tr.x.row(static_cast<Eigen::Index>(i)) = rows[i].x.transpose();
    tr.y(static_cast<Eigen::Index>(i)) = ys[i];
    tr.covariate.push_back(rows[i].covariate);
  }
  return tr;
}

std::vector<LogisticCurve> fit_power_curves(const ModelSpec& spec, const SpaceTimeSeries& data,
                                            std::size_t site, const NwpArchive& nwp) {
  const int buckets = (spec.max_lead - 1) / spec.lead_bucket_hours + 1;
  std::vector<std::vector<double>> speeds(static_cast<std::size_t>(buckets)),
      powers(static_cast<std::size_t>(buckets));
  for (const auto& run : nwp.runs()) {
    auto row = data.index_of(run.origin);
    if (!row) continue;
    for (int k = 1; k <= std::min(run.horizon(), spec.max_lead); ++k) {
      const auto t = *row + static_cast<std::size_t>(k);
      if (t >= data.num_times()) break;
      auto y = data.get(t, site);
      if (!y) continue;
      const auto b = static_cast<std::size_t>((k - 1) / spec.lead_bucket_hours);
      speeds[b].push_back(run.speed(k));
      powers[b].push_back(*y);
    }
  }
  std::vector<LogisticCurve> curves;
  for (std::size_t b = 0; b < speeds.size(); ++b) curves.push_back(fit_logistic(speeds[b], powers[b]));
  return curves;
}

Eigen::VectorXd kernel_weights(const CovariateGrid& grid, const std::vector<double>& cov, int node,
                               double bandwidth) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(cov.size()));
  for (std::size_t i = 0; i < cov.size(); ++i) {
    if (std::isinf(bandwidth)) {
      w(static_cast<Eigen::Index>(i)) = 1.0;
    } else {
      const double d = grid.distance(cov[i], node) / bandwidth;
      w(static_cast<Eigen::Index>(i)) = std::max(0.0, 1.0 - d);
    }
  }
  return w;
}

// Bandwidth actually used for a node: widened until enough rows carry weight.
double node_bandwidth(const ModelSpec& spec, const std::vector<double>& cov, int node,
                      std::size_t min_rows) {
  double h = spec.grid.bandwidth;
  const double span = spec.grid.periodic() ? 180.0 : spec.grid.hi - spec.grid.lo;
  while (!std::isinf(h)) {
    std::size_t count = 0;
    for (double x : cov)
      if (spec.grid.distance(x, node) < h) ++count;
    if (count >= min_rows) break;
    h *= 1.5;
    if (h > 4.0 * span) h = std::numeric_limits<double>::infinity();
  }
  return h;
}

void finish_lead(const ModelSpec& spec, LeadModel& lm, const Training& tr) {
  double rss = 0.0;
  for (Eigen::Index i = 0; i < tr.y.size(); ++i) {
    DesignRow row{tr.x.row(i).transpose(), tr.covariate[static_cast<std::size_t>(i)]};
    const double r = tr.y(i) - part_predict(spec, lm, row);
    rss += r * r;
  }
  lm.rows = static_cast<std::size_t>(tr.y.size());
  lm.rmse = std::sqrt(rss / static_cast<double>(lm.rows));
  if (is_cp(spec.family)) {
    const auto dof = static_cast<double>(lm.rows) - static_cast<double>(spec.parameter_count());
    lm.sigma = {std::sqrt(rss / std::max(dof, 1.0))};
  }
}

std::vector<int> lead_slots(const ModelSpec& spec) {
  std::vector<int> slots;
  if (spec.mode == HorizonMode::Iterated) return {1};
  for (int k = 1; k <= spec.max_lead; ++k) slots.push_back(k);
  return slots;
}

void check_inputs(const ModelSpec& spec, const SpaceTimeSeries& data, std::size_t site,
                  const NwpArchive* nwp) {
  spec.validate();
  if (site >= data.num_sites()) throw std::out_of_range("site index outside the series");
  if (spec.needs_nwp() && (!nwp || nwp->empty()))
    throw DataError(fmt::format("missing NWP: model family '{}' requires NWP input",
                                family_name(spec.family)));
}

}  // namespace

void ModelSpec::validate() const {
  if (lags.empty()) throw std::invalid_argument("lag set must be nonempty");
  auto sorted = lags;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 1) throw std::invalid_argument("lags must be positive integers");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("lags must be distinct");
  if (max_lead < 1) throw std::invalid_argument("max_lead must be >= 1");
  if (!std::is_sorted(regime.thresholds.begin(), regime.thresholds.end()) ||
      std::adjacent_find(regime.thresholds.begin(), regime.thresholds.end()) != regime.thresholds.end())
    throw std::invalid_argument("regime thresholds must be strictly increasing");
  for (const auto& term : offsite)
    if (term.lags.empty()) throw std::invalid_argument("off-site lag sets must be nonempty");
  if (is_cp(family)) {
    if (grid.nodes < 2) throw std::invalid_argument("covariate grid needs at least two nodes");
    if (grid.covariate == Covariate::LastPower)
      throw std::invalid_argument("CP models take an NWP covariate");
    if (!grid.periodic() && !(grid.hi > grid.lo))
      throw std::invalid_argument("covariate grid needs hi > lo");
    if (!(grid.bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  }
  if ((family == ModelFamily::RST || family == ModelFamily::CPARX) && mode == HorizonMode::Iterated)
    throw std::invalid_argument(
        fmt::format("model family '{}' supports direct mode only", family_name(family)));
  if (lead_bucket_hours < 1) throw std::invalid_argument("lead bucket must be >= 1 hour");
}

bool ModelSpec::needs_nwp() const {
  if (is_cp(family)) return true;
  return is_regime(family) && !regime.thresholds.empty() && regime.covariate != Covariate::LastPower;
}

std::size_t ModelSpec::parameter_count() const {
  std::size_t p = lags.size();
  if (family == ModelFamily::CPARX) return p + 3;
  p += 1;
  if (family == ModelFamily::RST)
    for (const auto& term : offsite) p += term.lags.size();
  return p;
}

const LeadModel& FittedModel::lead_model(int lead) const {
  if (lead < 1 || lead > spec.max_lead) throw std::out_of_range("lead outside the model horizon");
  if (spec.mode == HorizonMode::Iterated) return leads.at(0);
  return leads.at(static_cast<std::size_t>(lead - 1));
}

double FittedModel::noise_sd(int lead) const {
  const auto& lm = lead_model(lead);
  double s = 0.0;
  for (double v : lm.sigma) s += v;
  return s / static_cast<double>(lm.sigma.size());
}

std::optional<DesignRow> design_row(const ModelSpec& spec, const std::vector<LogisticCurve>& curves,
                                    const SpaceTimeSeries& series, std::size_t site,
                                    const std::vector<std::size_t>& offsite_sites,
                                    std::size_t origin, int lead, const NwpForecast* nwp) {
  return build_row(spec, curves, site, offsite_sites, series_lags(series, origin),
                   series.times().at(origin) + Hours{lead}, lead, nwp);
}

FittedModel fit(const ModelSpec& spec, const SpaceTimeSeries& data, std::size_t site,
                const NwpArchive* nwp) {
  check_inputs(spec, data, site, nwp);
  FittedModel model;
  model.spec = spec;
  model.site = data.sites().id(site);
  const auto offsite = resolve_offsite(spec, data.sites());
  if (spec.family == ModelFamily::CPARX) model.power_curves = fit_power_curves(spec, data, site, *nwp);

  const std::size_t p = spec.parameter_count();
  double mse_sum = 0.0;
  for (int lead : lead_slots(spec)) {
    const auto tr = gather(spec, model.power_curves, data, site, offsite, nwp, lead);
    if (static_cast<std::size_t>(tr.y.size()) < 10 * p)
      throw DataError(fmt::format("too few rows: {} usable for {} parameters at lead {}",
                                  tr.y.size(), p, lead));
    LeadModel lm;
    if (is_cp(spec.family)) {
      for (int node = 0; node < spec.grid.nodes; ++node) {
        const double h = node_bandwidth(spec, tr.covariate, node, 10 * p);
        auto fit = least_squares(tr.x, tr.y, kernel_weights(spec.grid, tr.covariate, node, h), 10 * p);
        lm.coefficients.push_back(std::move(fit.coefficients));
      }
    } else if (is_regime(spec.family)) {
      for (int r = 0; r < spec.regime.regimes(); ++r) {
        Eigen::VectorXd w(tr.y.size());
        for (Eigen::Index i = 0; i < w.size(); ++i)
          w(i) = spec.regime.regime_of(tr.covariate[static_cast<std::size_t>(i)]) == r ? 1.0 : 0.0;
        auto fit = spec.regime.regimes() == 1 ? least_squares(tr.x, tr.y, {}, 10 * p)
                                              : least_squares(tr.x, tr.y, w, 10 * p);
        lm.coefficients.push_back(std::move(fit.coefficients));
        lm.sigma.push_back(fit.sigma);
      }
    } else {
      auto fit = least_squares(tr.x, tr.y, {}, 10 * p);
      lm.coefficients.push_back(std::move(fit.coefficients));
      lm.sigma.push_back(fit.sigma);
    }
    finish_lead(spec, lm, tr);
    mse_sum += lm.rmse * lm.rmse;
    model.leads.push_back(std::move(lm));
  }
  model.in_sample_rmse = std::sqrt(mse_sum / static_cast<double>(model.leads.size()));
  return model;
}

RecursiveFit fit_recursive(const ModelSpec& spec, const SpaceTimeSeries& data, std::size_t site,
                           double forgetting, const NwpArchive* nwp, std::size_t initial_window) {
  if (!(forgetting > 0.9 && forgetting <= 1.0))
    throw std::invalid_argument("forgetting factor must lie in (0.9, 1]");
  check_inputs(spec, data, site, nwp);
  RecursiveFit out;
  auto& model = out.model;
  model.spec = spec;
  model.site = data.sites().id(site);
  const auto offsite = resolve_offsite(spec, data.sites());
  if (spec.family == ModelFamily::CPARX) model.power_curves = fit_power_curves(spec, data, site, *nwp);

  const std::size_t p = spec.parameter_count();
  const std::size_t window = initial_window == 0 ? 10 * p : initial_window;
  double mse_sum = 0.0;
  for (int lead : lead_slots(spec)) {
    const auto tr = gather(spec, model.power_curves, data, site, offsite, nwp, lead);
    if (static_cast<std::size_t>(tr.y.size()) < std::max(window, 10 * p))
      throw DataError(fmt::format("too few rows: {} usable for {} parameters at lead {}",
                                  tr.y.size(), p, lead));
    LeadModel lm;
    std::vector<std::vector<Eigen::VectorXd>> paths;
    std::vector<Eigen::VectorXd> weights;
    if (is_cp(spec.family)) {
      for (int node = 0; node < spec.grid.nodes; ++node)
        weights.push_back(kernel_weights(spec.grid, tr.covariate, node,
                                         node_bandwidth(spec, tr.covariate, node, 10 * p)));
    } else if (is_regime(spec.family) && spec.regime.regimes() > 1) {
      for (int r = 0; r < spec.regime.regimes(); ++r) {
        Eigen::VectorXd w(tr.y.size());
        for (Eigen::Index i = 0; i < w.size(); ++i)
          w(i) = spec.regime.regime_of(tr.covariate[static_cast<std::size_t>(i)]) == r ? 1.0 : 0.0;
        weights.push_back(std::move(w));
      }
    } else {
      weights.emplace_back();
    }
    for (const auto& w : weights) {
      // The initial window must hold enough weighted rows for this part.
      std::size_t start = window;
      if (w.size() != 0) {
        std::size_t seen = 0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
          if (w(i) > 0.0) ++seen;
          if (seen >= window) {
            start = static_cast<std::size_t>(i) + 1;
            break;
          }
        }
      }
      auto rls = recursive_least_squares(tr.x, tr.y, forgetting, start, w);
      lm.coefficients.push_back(rls.coefficients);
      paths.push_back(std::move(rls.history));
    }
    // Residual sd of the final parameters over the training rows, per part.
    if (!is_cp(spec.family)) {
      for (std::size_t part = 0; part < lm.coefficients.size(); ++part) {
        double rss = 0.0, n = 0.0;
        for (Eigen::Index i = 0; i < tr.y.size(); ++i) {
          if (weights[part].size() != 0 && weights[part](i) <= 0.0) continue;
          const double r = tr.y(i) - tr.x.row(i).dot(lm.coefficients[part]);
          rss += r * r;
          n += 1.0;
        }
        lm.sigma.push_back(std::sqrt(rss / std::max(n - static_cast<double>(p), 1.0)));
      }
    }
    finish_lead(spec, lm, tr);
    mse_sum += lm.rmse * lm.rmse;
    model.leads.push_back(std::move(lm));
    out.history.push_back(std::move(paths));
  }
  model.in_sample_rmse = std::sqrt(mse_sum / static_cast<double>(model.leads.size()));
  return out;
}

std::vector<double> predict_point(const FittedModel& model, const SpaceTimeSeries& history,
                                  std::size_t origin, const NwpForecast* nwp) {
  const auto& spec = model.spec;
  auto site_idx = history.sites().index_of(model.site);
  if (!site_idx) throw DataError(fmt::format("site '{}' absent from history", model.site));
  const std::size_t site = *site_idx;
  if (origin >= history.num_times()) throw std::out_of_range("origin outside history");
  if (spec.needs_nwp() && !nwp)
    throw DataError(fmt::format("missing NWP for origin {}", format_utc(history.times()[origin])));
  if (spec.needs_nwp() && nwp->horizon() < spec.max_lead)
    throw DataError(fmt::format("NWP horizon {} shorter than {} leads", nwp->horizon(), spec.max_lead));
  const auto offsite = resolve_offsite(spec, history.sites());
  auto missing_input = [&] {
    return DataError(fmt::format("missing lag for site '{}' at origin {}", model.site,
                                 format_utc(history.times()[origin])));
  };

  std::vector<double> out(static_cast<std::size_t>(spec.max_lead));
  const TimePoint t0 = history.times()[origin];
  if (spec.mode == HorizonMode::Direct) {
    for (int k = 1; k <= spec.max_lead; ++k) {
      auto row = build_row(spec, model.power_curves, site, offsite, series_lags(history, origin),
                           t0 + Hours{k}, k, nwp);
      if (!row) throw missing_input();
      out[static_cast<std::size_t>(k - 1)] =
          std::clamp(part_predict(spec, model.lead_model(k), *row), 0.0, 1.0);
    }
    return out;
  }

  // Iterated: chain one-step predictions, feeding forecasts back as lags.
  const auto& one_step = model.leads.at(0);
  for (int j = 1; j <= spec.max_lead; ++j) {
    // Lag l of the step ending at t+j is y_{t+j-l}.
    LagFn shifted = [&](std::size_t s, int l) -> std::optional<double> {
      const int offset = j - l;
      if (offset >= 1) {
        if (s != site) return std::nullopt;
        return out[static_cast<std::size_t>(offset - 1)];
      }
      const long row = static_cast<long>(origin) + offset;
      if (row < 0) return std::nullopt;
      return history.get(static_cast<std::size_t>(row), s);
    };
    const NwpForecast* run = nwp;
    std::optional<DesignRow> row;
    if (is_cp(spec.family)) {
      // Covariate taken at lead j of the run.
      row = build_row(spec, model.power_curves, site, offsite, shifted, t0 + Hours{j}, j, run);
    } else {
      row = build_row(spec, model.power_curves, site, offsite, shifted, t0 + Hours{j}, 1, run);
    }
    if (!row) throw missing_input();
    out[static_cast<std::size_t>(j - 1)] = std::clamp(part_predict(spec, one_step, *row), 0.0, 1.0);
  }
  return out;
}

std::vector<double> persistence(const SpaceTimeSeries& history, std::size_t site,
                                std::size_t origin, int leads) {
  auto last = history.get(origin, site);
  if (!last) throw DataError("missing observation at the forecast origin");
  return std::vector<double>(static_cast<std::size_t>(leads), *last);
}

}  // namespace windcast::point
