#include "windcast/app/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "common.hpp"
#include "windcast/copula/copula.hpp"
#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"
#include "windcast/core/random.hpp"
#include "windcast/decisions/market.hpp"
#include "windcast/decisions/reserves.hpp"
#include "windcast/point/serialize.hpp"
#include "windcast/prob/dressing.hpp"
#include "windcast/prob/variance_tracker.hpp"
#include "windcast/sim/simulator.hpp"
#include "windcast/verify/reliability.hpp"
#include "windcast/verify/scores.hpp"

namespace windcast::app {

using namespace detail;

namespace {

// Seed purposes for derived per-origin streams.
enum : std::uint64_t { kTrajectorySeed = 1, kPriceSeed = 2, kReserveSeed = 3, kPitSeed = 4, kNwpSeed = 5 };

constexpr std::string_view kNames[] = {"simulate", "fit",     "forecast", "trajectories",
                                       "trade",    "reserve", "verify"};

// ---------------------------------------------------------------- simulate

void simulate_stage(const RunConfig& config, const Layout& layout) {
  const auto sim = sim::simulate(config.simulator_config(), static_cast<std::size_t>(config.run.hours));
  write_series(layout.series(), sim.power, true);
  for (std::size_t s = 0; s < config.sites.size(); ++s) {
    const std::uint64_t seed = make_stream({config.run.seed, kNwpSeed, s})();
    point::write_nwp(layout.nwp(config.sites.id(s)),
                     sim::synthesize_nwp(sim, s, config.model.spec.max_lead,
                                         config.simulator.nwp_every, config.simulator.nwp_error_sd,
                                         seed));
  }
}

// --------------------------------------------------------------------- fit

struct SiteFit {
  point::FittedModel point;
  ProbModel prob;
};

SiteFit fit_site(const RunConfig& config, const Inputs& inputs, std::size_t site,
                 std::size_t train_end) {
  const auto& spec = config.model.spec;
  const SpaceTimeSeries train = inputs.series.slice(0, train_end);
  const point::NwpArchive* nwp = inputs.nwp.empty() ? nullptr : &inputs.nwp[site];

  SiteFit out;
  out.point = config.model.forgetting < 1.0
                  ? point::fit_recursive(spec, train, site, config.model.forgetting, nwp).model
                  : point::fit(spec, train, site, nwp);

  const auto& p = config.probabilistic;
  out.prob.method = p.method;
  out.prob.site = config.sites.id(site);
  out.prob.levels = p.levels;
  if (p.method == ProbMethod::Dressing) return out;

  const auto cases = training_cases(out.point, inputs, site, train_end, p.training_every);
  if (p.method == ProbMethod::QuantileRegression) {
    for (int k = 1; k <= spec.max_lead; ++k) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(cases.size()), 3);
      Eigen::VectorXd y(x.rows());
      Eigen::Index rows = 0;
      for (const auto& c : cases) {
        auto obs = inputs.series.get(c.origin + static_cast<std::size_t>(k), site);
        if (!obs) continue;
        x.row(rows) = quantile_features(c.point[static_cast<std::size_t>(k - 1)]).transpose();
        y(rows++) = *obs;
      }
      x.conservativeResize(rows, Eigen::NoChange);
      y.conservativeResize(rows);
      out.prob.qr.push_back(
          prob::fit_adaptive_qr(x, y, p.levels, prob::QrOptions{.forgetting = p.forgetting}));
    }
  } else {
    out.prob.family = p.family;
    prob::VarianceTracker tracker(static_cast<std::size_t>(spec.max_lead), p.variance_smoothing, 0.01);
    for (const auto& c : cases)
      for (int k = 1; k <= spec.max_lead; ++k)
        if (auto obs = inputs.series.get(c.origin + static_cast<std::size_t>(k), site))
          tracker.update(static_cast<std::size_t>(k - 1),
                         *obs - c.point[static_cast<std::size_t>(k - 1)]);
    for (int k = 1; k <= spec.max_lead; ++k)
      out.prob.variance.push_back(tracker.variance(static_cast<std::size_t>(k - 1)));
    if (p.family == prob::Family::GeneralizedLogitNormal) {
      std::vector<double> y;
      for (double v : train.column(site))
        if (!std::isnan(v)) y.push_back(v);
      out.prob.nu = prob::estimate_gln_shape(y);
    }
  }
  return out;
}

void fit_stage(const RunConfig& config, const Layout& layout, const RunOptions& options) {
  const Inputs inputs = load_inputs(config, layout);
  const std::size_t train_end = train_rows(config, inputs.series.num_times());
  std::vector<SiteFit> fits(config.sites.size());
  parallel_for(fits.size(), options.threads,
               [&](std::size_t s) { fits[s] = fit_site(config, inputs, s, train_end); });
  for (const auto& f : fits) {
    point::save_model(layout.point_model(f.prob.site), f.point);
    save_prob_model(layout.prob_model(f.prob.site), f.prob);
  }
}

// ---------------------------------------------------------------- forecast

struct SiteForecasts {
  std::vector<std::vector<double>> points;                 // per origin, per lead
  std::vector<std::vector<prob::PredictiveCDF>> marginals;  // per origin, per lead
};

SiteForecasts forecast_site(const RunConfig& config, const Inputs& inputs, const Layout& layout,
                            std::size_t site, std::size_t train_end,
                            const std::vector<std::size_t>& origins) {
  const auto& id = config.sites.id(site);
  require_input(layout.point_model(id));
  const auto model = point::load_model(layout.point_model(id));
  const auto pm = load_prob_model(layout.prob_model(id));
  const int leads = config.model.spec.max_lead;
  if (model.spec.max_lead != leads || model.site != id)
    throw DataError(fmt::format("model for {} does not match the configuration", id));
  if (pm.method != config.probabilistic.method || pm.site != id)
    throw DataError(fmt::format("probabilistic model for {} does not match the configuration", id));
  if (pm.method == ProbMethod::QuantileRegression && pm.qr.size() != static_cast<std::size_t>(leads))
    throw DataError(fmt::format("probabilistic model for {} has {} leads", id, pm.qr.size()));
  if (pm.method == ProbMethod::Parametric && pm.variance.size() != static_cast<std::size_t>(leads))
    throw DataError(fmt::format("probabilistic model for {} has {} leads", id, pm.variance.size()));

  std::optional<prob::ErrorClimatology> climatology;
  if (pm.method == ProbMethod::Dressing) {
    climatology.emplace(leads);
    for (const auto& c : training_cases(model, inputs, site, train_end,
                                        config.probabilistic.training_every))
      for (int k = 1; k <= leads; ++k)
        if (auto obs = inputs.series.get(c.origin + static_cast<std::size_t>(k), site))
          climatology->add(c.point[static_cast<std::size_t>(k - 1)], k, *obs);
    climatology->finalize();
  }

  SiteForecasts out;
  for (std::size_t t : origins) {
    auto point = point::predict_point(model, inputs.series, t, inputs.nwp_at(site, t));
    std::vector<prob::PredictiveCDF> cdfs;
    for (int k = 1; k <= leads; ++k) {
      const double yhat = point[static_cast<std::size_t>(k - 1)];
      switch (pm.method) {
        case ProbMethod::QuantileRegression:
          cdfs.emplace_back(pm.qr[static_cast<std::size_t>(k - 1)].predict(quantile_features(yhat)));
          break;
        case ProbMethod::Dressing:
          cdfs.emplace_back(climatology->dress(yhat, k, pm.levels).quantiles);
          break;
        case ProbMethod::Parametric:
          cdfs.emplace_back(prob::make_parametric(yhat, pm.variance[static_cast<std::size_t>(k - 1)],
                                                  pm.family, pm.nu));
          break;
      }
    }
    out.points.push_back(std::move(point));
    out.marginals.push_back(std::move(cdfs));
  }
  return out;
}

std::vector<prob::MarginalForecast> interleave(const RunConfig& config,
                                               const std::vector<SiteForecasts>& sites,
                                               const Inputs& inputs,
                                               const std::vector<std::size_t>& origins) {
  std::vector<prob::MarginalForecast> rows;
  for (std::size_t o = 0; o < origins.size(); ++o)
    for (std::size_t s = 0; s < sites.size(); ++s)
      for (std::size_t k = 0; k < sites[s].marginals[o].size(); ++k)
        rows.push_back({inputs.series.times()[origins[o]], config.sites.id(s),
                        static_cast<int>(k + 1), sites[s].marginals[o][k]});
  return rows;
}

void forecast_stage(const RunConfig& config, const Layout& layout, const RunOptions& options) {
  const Inputs inputs = load_inputs(config, layout);
  const std::size_t n = inputs.series.num_times();
  const std::size_t train_end = train_rows(config, n);
  auto warm = daily_origins(config, inputs, 0, train_end);
  const auto keep = static_cast<std::size_t>(config.copula.warmup_days);
  if (warm.size() > keep) warm.erase(warm.begin(), warm.end() - static_cast<std::ptrdiff_t>(keep));
  const auto test = daily_origins(config, inputs, train_end, n);
  if (test.empty()) throw DataError("no forecast origins in the test period");

  std::vector<SiteForecasts> warm_f(config.sites.size()), test_f(config.sites.size());
  parallel_for(config.sites.size(), options.threads, [&](std::size_t s) {
    std::vector<std::size_t> all = warm;
    all.insert(all.end(), test.begin(), test.end());
    auto f = forecast_site(config, inputs, layout, s, train_end, all);
    auto split = static_cast<std::ptrdiff_t>(warm.size());
    warm_f[s].points.assign(f.points.begin(), f.points.begin() + split);
    warm_f[s].marginals.assign(f.marginals.begin(), f.marginals.begin() + split);
    test_f[s].points.assign(f.points.begin() + split, f.points.end());
    test_f[s].marginals.assign(f.marginals.begin() + split, f.marginals.end());
  });

  const auto& levels = config.probabilistic.levels;
  const auto test_rows = interleave(config, test_f, inputs, test);
  prob::write_quantile_forecasts(layout.warmup_quantiles(), interleave(config, warm_f, inputs, warm),
                                 levels);
  prob::write_quantile_forecasts(layout.quantiles(), test_rows, levels);
  if (config.probabilistic.method == ProbMethod::Parametric)
    prob::write_parametric_forecasts(layout.parametric(), test_rows);

  auto out = csv::open_out(layout.point_forecasts());
  out << "origin,site,lead_h,forecast\n";
  for (std::size_t o = 0; o < test.size(); ++o)
    for (std::size_t s = 0; s < config.sites.size(); ++s)
      for (std::size_t k = 0; k < test_f[s].points[o].size(); ++k)
        out << fmt::format("{},{},{},{}\n", format_utc(inputs.series.times()[test[o]]),
                           config.sites.id(s), k + 1, csv::fmt_double(test_f[s].points[o][k]));

  if (options.emit_plots_data) {
    auto fan = csv::open_out(layout.fan_chart());
    fan << "origin,site,lead_h,coverage,lower,upper,observed\n";
    for (const auto& r : test_rows) {
      const auto row = *inputs.series.index_of(r.origin) + static_cast<std::size_t>(r.lead);
      const auto obs = inputs.series.get(row, *config.sites.index_of(r.site));
      for (int c = 1; c <= 9; ++c) {
        const double coverage = c / 10.0;
        fan << fmt::format("{},{},{},{},{},{},{}\n", format_utc(r.origin), r.site, r.lead,
                           csv::fmt_double(coverage),
                           csv::fmt_double(prob::cdf_inverse(r.cdf, 0.5 - coverage / 2.0)),
                           csv::fmt_double(prob::cdf_inverse(r.cdf, 0.5 + coverage / 2.0)),
                           obs ? csv::fmt_double(*obs) : "NA");
      }
    }
  }
}

// ------------------------------------------------------------ trajectories

struct ForecastBlocks {
  SpaceTimeSeries series;
  std::vector<OriginForecasts> warmup;
  std::vector<OriginForecasts> test;
};

ForecastBlocks load_blocks(const RunConfig& config, const Layout& layout, bool with_warmup = true) {
  require_input(layout.series());
  require_input(layout.quantiles());
  const int leads = config.model.spec.max_lead;
  ForecastBlocks b;
  b.series = load_series(layout.series(), config.sites);
  if (with_warmup) {
    require_input(layout.warmup_quantiles());
    b.warmup = group_by_origin(prob::read_quantile_forecasts(layout.warmup_quantiles()), config.sites,
                               leads);
  }
  b.test = group_by_origin(prob::read_quantile_forecasts(layout.quantiles()), config.sites, leads);
  if (b.test.empty()) throw DataError("no test forecasts");
  return b;
}

void trajectories_stage(const RunConfig& config, const Layout& layout) {
  const auto blocks = load_blocks(config, layout);
  std::vector<copula::TrajectorySet> sets;
  const auto final_cov = track_covariance(
      config, blocks.series, blocks.warmup, blocks.test,
      [&](std::size_t, const OriginForecasts& f, const copula::LatentCovariance& cov) {
        sets.push_back(copula::sample_trajectories(
            target_at(config, f.origin), f.marginals, cov, config.copula.trajectories,
            derived_seed(config.run.seed, kTrajectorySeed, f.origin)));
      });
  copula::write_trajectories(layout.trajectories(), sets);
  copula::write_covariance(layout.covariance(), final_cov);
}

// ------------------------------------------------------------------- trade

void trade_stage(const RunConfig& config, const Layout& layout) {
  require_input(layout.series());
  require_input(layout.quantiles());
  const int leads = config.model.spec.max_lead;
  const auto series = load_series(layout.series(), config.sites);
  const auto test = group_by_origin(prob::read_quantile_forecasts(layout.quantiles()), config.sites, leads);
  const std::size_t site = config.market_site();
  const double capacity = config.sites.capacity(site);
  const auto market_leads = config.market.spec.leads();

  std::map<TimePoint, decisions::MarketPrices> supplied;
  if (config.market.prices) {
    require_input(*config.market.prices);
    for (auto& p : decisions::read_prices(*config.market.prices)) supplied.emplace(p.origin, std::move(p));
  }
  auto realized = [&](TimePoint origin) -> std::optional<decisions::MarketPrices> {
    if (!config.market.prices)
      return decisions::synthetic_prices(origin, market_leads,
                                         derived_seed(config.run.seed, kPriceSeed, origin));
    auto it = supplied.find(origin);
    if (it == supplied.end()) return std::nullopt;
    return it->second;
  };

  std::map<TimePoint, copula::TrajectorySet> paths;
  if (std::filesystem::exists(layout.trajectories()))
    for (auto& set : copula::read_trajectories(layout.trajectories())) paths.emplace(set.origin, std::move(set));

  std::vector<decisions::MarketPrices> realized_all, forecast_all;
  std::vector<decisions::BidRecord> bids;
  auto settlement = csv::open_out(layout.settlement());
  settlement << "origin,lead_h,alpha,bid,observed,day_ahead_revenue,balancing_cost,total\n";
  std::vector<std::pair<TimePoint, double>> trajectory_costs;

  for (const auto& f : test) {
    auto actual = realized(f.origin);
    if (!actual) throw DataError(fmt::format("no prices for origin {}", format_utc(f.origin)));
    auto previous = realized(f.origin - Hours{24});
    const auto forecast = decisions::persistence_forecast(previous ? *previous : *actual, f.origin);

    std::vector<decisions::Bid> day;
    for (int k : market_leads) {
      const auto& cdf = f.marginals[site * static_cast<std::size_t>(leads) + static_cast<std::size_t>(k - 1)];
      const auto bid = decisions::optimal_bid(cdf, forecast.at(k), k);
      bids.push_back({f.origin, bid});
      day.push_back(bid);
      const auto row = series.index_of(f.origin + Hours{k});
      const auto obs = row ? series.get(*row, site) : std::nullopt;
      if (!obs) continue;
      const auto r = decisions::settle(*obs, bid.value, actual->at(k));
      settlement << fmt::format("{},{},{},{},{},{},{},{}\n", format_utc(f.origin), k,
                                csv::fmt_double(bid.alpha), csv::fmt_double(bid.value),
                                csv::fmt_double(*obs), csv::fmt_double(r.day_ahead_revenue * capacity),
                                csv::fmt_double(r.balancing_cost * capacity),
                                csv::fmt_double(r.total * capacity));
    }
    if (auto it = paths.find(f.origin); it != paths.end())
      trajectory_costs.emplace_back(
          f.origin, capacity * decisions::expected_cost_over_trajectories(it->second, site, day, forecast));
    realized_all.push_back(*actual);
    forecast_all.push_back(forecast);
  }
  decisions::write_prices(layout.prices(), realized_all);
  decisions::write_prices(layout.price_forecasts(), forecast_all);
  decisions::write_bids(layout.bids(), bids);
  if (!trajectory_costs.empty()) {
    auto out = csv::open_out(layout.root / "trade" / "trajectory_cost.csv");
    out << "origin,expected_imbalance_cost\n";
    for (const auto& [origin, cost] : trajectory_costs)
      out << format_utc(origin) << ',' << csv::fmt_double(cost) << '\n';
  }
}

// ----------------------------------------------------------------- reserve

void reserve_stage(const RunConfig& config, const Layout& layout) {
  const auto blocks = load_blocks(config, layout);
  const int leads = config.model.spec.max_lead;
  const auto points = read_point_forecasts(layout.point_forecasts(), config.sites, leads);
  const auto& r = config.reserve;
  const double total = config.sites.total_capacity();

  const auto load = decisions::GridDensity::gaussian(0.0, r.load_error_sd, r.step);
  const auto outage = r.outage_probability > 0.0 && r.outage_size > 0.0
                          ? decisions::GridDensity::two_point_outage(r.outage_probability,
                                                                     r.outage_size, r.step)
                          : decisions::GridDensity::point_mass(0.0, r.step);

  std::vector<decisions::ReserveRecord> records;
  track_covariance(
      config, blocks.series, blocks.warmup, blocks.test,
      [&](std::size_t, const OriginForecasts& f, const copula::LatentCovariance& cov) {
        auto it = points.find(f.origin);
        if (it == points.end())
          throw DataError(fmt::format("no point forecasts for origin {}", format_utc(f.origin)));
        const auto latent = copula::sample_latent(cov, r.scenarios,
                                                  derived_seed(config.run.seed, kReserveSeed, f.origin));
        for (int k : config.market.spec.leads()) {
          std::vector<double> weights;
          std::vector<std::size_t> cells;
          double expected = 0.0;
          for (std::size_t s = 0; s < config.sites.size(); ++s) {
            const std::size_t i = s * static_cast<std::size_t>(leads) + static_cast<std::size_t>(k - 1);
            weights.push_back(config.sites.capacity(s) / total);
            cells.push_back(i);
            expected += weights.back() * it->second[i];
          }
          std::vector<double> errors;
          for (const auto& z : latent) {
            double y = 0.0;
            for (std::size_t s = 0; s < cells.size(); ++s)
              y += weights[s] * prob::cdf_inverse(f.marginals[cells[s]],
                                                  copula::latent_level(z(static_cast<Eigen::Index>(cells[s]))));
            errors.push_back(y - expected);
          }
          decisions::ReserveProblem problem{load, outage,
                                            decisions::GridDensity::from_samples(errors, r.step),
                                            r.up, r.down};
          const auto margin = decisions::convolve_margin(problem);
          records.push_back({f.origin, k, decisions::optimal_reserves(problem, margin)});
        }
      });
  decisions::write_reserves(layout.reserves(), records);
}

// ------------------------------------------------------------------ verify

void verify_stage(const RunConfig& config, const Layout& layout) {
  require_input(layout.trajectories());
  const auto blocks = load_blocks(config, layout, false);
  const int leads = config.model.spec.max_lead;
  const auto points = read_point_forecasts(layout.point_forecasts(), config.sites, leads);
  const auto sets = copula::read_trajectories(layout.trajectories());
  const auto& series = blocks.series;
  const auto& levels = config.probabilistic.levels;
  const auto block = static_cast<std::size_t>(config.verify.bootstrap_block);
  const int reps = config.verify.replicates;
  const std::uint64_t seed = config.run.seed;
  const std::size_t m = config.sites.size();

  struct Cell {
    TimePoint origin;
    std::size_t site;
    int lead;
    double y;
    double point;
    double persistence;
    const prob::PredictiveCDF* cdf;
  };
  std::vector<Cell> cells;  // ordered by origin, site, lead
  for (const auto& f : blocks.test) {
    const auto origin_row = series.index_of(f.origin);
    if (!origin_row) throw DataError(fmt::format("origin {} outside the series", format_utc(f.origin)));
    auto point_row = points.find(f.origin);
    if (point_row == points.end())
      throw DataError(fmt::format("no point forecasts for origin {}", format_utc(f.origin)));
    for (std::size_t s = 0; s < m; ++s) {
      const auto last = series.get(*origin_row, s);
      for (int k = 1; k <= leads; ++k) {
        const auto obs = series.get(*origin_row + static_cast<std::size_t>(k), s);
        if (!obs || !last) continue;
        const std::size_t i = s * static_cast<std::size_t>(leads) + static_cast<std::size_t>(k - 1);
        cells.push_back({f.origin, s, k, *obs, point_row->second[i], *last, &f.marginals[i]});
      }
    }
  }
  if (cells.empty()) throw DataError("no verifiable forecast cells");

  std::vector<std::vector<double>> quantiles;
  std::vector<double> crps_cell, pinball_cell;
  for (const auto& c : cells) {
    std::vector<double> q;
    double loss = 0.0;
    for (double a : levels) {
      q.push_back(prob::cdf_inverse(*c.cdf, a));
      loss += prob::check_loss(c.y - q.back(), a);
    }
    quantiles.push_back(std::move(q));
    pinball_cell.push_back(loss / static_cast<double>(levels.size()));
    crps_cell.push_back(verify::crps(*c.cdf, c.y));
  }

  std::vector<verify::ScoreEntry> scores;
  auto add_group = [&](int lead) {
    std::vector<double> se, ae, err, pse, crps, pin;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      if (lead != 0 && c.lead != lead) continue;
      const double e = c.point - c.y;
      se.push_back(e * e);
      ae.push_back(std::abs(e));
      err.push_back(e);
      pse.push_back((c.persistence - c.y) * (c.persistence - c.y));
      crps.push_back(crps_cell[i]);
      pin.push_back(pinball_cell[i]);
    }
    auto rmse = [&](std::string name, const std::vector<double>& sq) {
      auto mse = verify::summarize(name, lead, sq, block, reps, seed);
      const double root = std::sqrt(mse.value);
      mse.se = root > 0.0 ? mse.se / (2.0 * root) : 0.0;
      mse.value = root;
      return mse;
    };
    scores.push_back(rmse("rmse", se));
    scores.push_back(verify::summarize("mae", lead, ae, block, reps, seed));
    scores.push_back(verify::summarize("bias", lead, err, block, reps, seed));
    scores.push_back(rmse("persistence_rmse", pse));
    scores.push_back(verify::summarize("crps", lead, crps, block, reps, seed));
    scores.push_back(verify::summarize("pinball", lead, pin, block, reps, seed));
  };
  add_group(0);
  for (int k = 1; k <= leads; ++k) add_group(k);

  std::vector<double> energy;
  for (const auto& set : sets) {
    auto y = observed_window(target_at(config, set.origin), series);
    if (!y.empty()) energy.push_back(verify::energy_score(set, y));
  }
  if (!energy.empty()) scores.push_back(verify::summarize("energy_score", 0, energy, 7, reps, seed));

  std::vector<prob::PredictiveCDF> cdfs;
  std::vector<double> ys;
  std::vector<std::string> bins;
  for (const auto& c : cells) {
    cdfs.push_back(*c.cdf);
    ys.push_back(c.y);
    const int bucket = (c.lead - 1) / 6;
    bins.push_back(fmt::format("k{:02d}-{:02d}", bucket * 6 + 1, std::min(bucket * 6 + 6, leads)));
  }
  const auto pits = verify::pit(cdfs, ys, make_stream({seed, kPitSeed})());
  const auto ks = verify::ks_uniform(pits);
  scores.push_back({"pit_ks_statistic", 0, ks.statistic, 0.0, pits.size()});
  scores.push_back({"pit_ks_pvalue", 0, ks.p_value, 0.0, pits.size()});
  verify::write_scores(layout.scores(), scores);

  verify::write_reliability(layout.reliability(), verify::reliability(quantiles, ys, levels));
  verify::write_reliability(layout.conditional_reliability(),
                            verify::conditional_reliability(quantiles, ys, levels, bins));

  auto out = csv::open_out(layout.pit());
  out << "origin,site,lead_h,pit\n";
  for (std::size_t i = 0; i < cells.size(); ++i)
    out << fmt::format("{},{},{},{}\n", format_utc(cells[i].origin), config.sites.id(cells[i].site),
                       cells[i].lead, csv::fmt_double(pits[i]));
}

}  // namespace

std::string_view stage_name(Stage stage) { return kNames[static_cast<int>(stage)]; }

Stage parse_stage(std::string_view name) {
  for (Stage s : all_stages())
    if (stage_name(s) == name) return s;
  throw ConfigError(fmt::format("unknown stage '{}'", name));
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::Simulate, Stage::Fit,     Stage::Forecast,
                                            Stage::Trajectories, Stage::Trade, Stage::Reserve,
                                            Stage::Verify};
  return stages;
}

std::size_t train_rows(const RunConfig& config, std::size_t total_rows) {
  return static_cast<std::size_t>(std::floor(config.run.train_fraction * static_cast<double>(total_rows)));
}

Eigen::VectorXd quantile_features(double point) {
  Eigen::VectorXd x(3);
  x << 1.0, point, point * (1.0 - point);
  return x;
}

void run_stage(Stage stage, const RunConfig& config, const RunOptions& options) {
  config.validate();
  config.check_paths();
  const Layout layout{config.run.out};
  switch (stage) {
    case Stage::Simulate: simulate_stage(config, layout); break;
    case Stage::Fit: fit_stage(config, layout, options); break;
    case Stage::Forecast: forecast_stage(config, layout, options); break;
    case Stage::Trajectories: trajectories_stage(config, layout); break;
    case Stage::Trade: trade_stage(config, layout); break;
    case Stage::Reserve: reserve_stage(config, layout); break;
    case Stage::Verify: verify_stage(config, layout); break;
  }
}

void run_pipeline(const RunConfig& config, const RunOptions& options, std::optional<Stage> from) {
  config.validate();
  config.check_paths();
  const Layout layout{config.run.out};
  {
    auto out = csv::open_out(layout.run_config());
    out << serialize_config(config);
  }
  bool started = !from;
  for (Stage s : all_stages()) {
    started = started || s == *from;
    if (started) run_stage(s, config, options);
  }
}

}  // namespace windcast::app
