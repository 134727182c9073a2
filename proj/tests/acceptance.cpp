// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "windcast/app/config.hpp"
#include "windcast/app/pipeline.hpp"
#include "windcast/copula/copula.hpp"
#include "windcast/decisions/market.hpp"
#include "windcast/decisions/reserves.hpp"
#include "windcast/point/least_squares.hpp"
#include "windcast/point/model.hpp"
#include "windcast/prob/normal.hpp"
#include "windcast/prob/parametric.hpp"
#include "windcast/prob/quantile_regression.hpp"
#include "windcast/sim/simulator.hpp"
#include "windcast/verify/reliability.hpp"
#include "windcast/verify/scores.hpp"

using namespace windcast;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const TimePoint kStart = parse_utc("2007-01-01T00:00:00Z");

decisions::Prices from_costs(double down, double up) { return {40.0, 40.0 + up, 40.0 - down}; }

sim::SimConfig single_site(double mean_speed, double speed_sd, std::uint64_t seed) {
  sim::SimConfig c;
  c.sites = SiteSet({"a"}, {1.0});
  c.ar_coefficient = {0.95};
  c.mean_speed = {mean_speed};
  c.speed_sd = speed_sd;
  c.spatial_correlation = Eigen::MatrixXd::Identity(1, 1);
  c.diurnal_amplitude = 1.5;
  c.diurnal_phase = 9.0;
  c.power_noise_sd = 0.03;
  c.start = kStart;
  c.seed = seed;
  return c;
}

// ------------------------------------------------------------------ 1

prob::PredictiveCDF random_density(std::mt19937_64& rng, int kind) {
  std::uniform_real_distribution<double> u(0, 1);
  switch (kind % 4) {
    case 0: {
      std::vector<double> pts, w;
      double total = 0;
      const int n = 1 + static_cast<int>(u(rng) * 10);
      for (int i = 0; i < n; ++i) {
        pts.push_back(u(rng));
        w.push_back(u(rng) + 0.01);
        total += w.back();
      }
      for (double& v : w) v /= total;
      return prob::DiscreteDistribution(pts, w);
    }
    case 1: return prob::ParametricDensity::beta(0.5 + 5 * u(rng), 0.5 + 5 * u(rng));
    case 2: return prob::ParametricDensity::censored_gaussian(1.4 * u(rng) - 0.2, 0.02 + 0.3 * u(rng));
    default: {
      std::vector<double> levels = {0.1, 0.25, 0.5, 0.75, 0.9}, values;
      double x = 0.3 * u(rng);
      for (std::size_t i = 0; i < levels.size(); ++i) {
        x += 0.15 * u(rng);
        values.push_back(std::min(x, 1.0));
      }
      return prob::QuantileSet(levels, values);
    }
  }
}

Outcome newsvendor() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> cost(0.01, 100);
  int violations = 0;
  double worst = -INFINITY;
  for (int i = 0; i < 100; ++i) {
    const auto f = random_density(rng, i);
    const auto p = from_costs(cost(rng), cost(rng));
    const double at_bid = decisions::expected_imbalance_cost(f, p, decisions::optimal_bid(f, p).value);
    double best = INFINITY;
    for (int g = 0; g < 1000; ++g) best = std::min(best, decisions::expected_imbalance_cost(f, p, g / 999.0));
    worst = std::max(worst, at_bid - best);
    if (at_bid > best + 1e-6) ++violations;
  }
  const double elapsed = seconds_since(t0);
  return {violations == 0 && elapsed < 10.0,
          fmt::format("100 densities, violations {}, max(bid - grid min) {:.3g}, {:.2f} s", violations, worst,
                      elapsed)};
}

// ------------------------------------------------------------------ 2

Outcome settlement() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(0, 1), price(0, 100), cost(0, 50);
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const double y = u(rng), bid = u(rng), pc = price(rng);
    const decisions::Prices p{pc, pc + cost(rng), pc - cost(rng)};
    const auto r = decisions::settle(y, bid, p);
    if (r.total != r.day_ahead_revenue - r.balancing_cost || r.balancing_cost < 0.0) ++violations;
  }
  return {violations == 0, fmt::format("1e5 triples, violations {}", violations)};
}

// ------------------------------------------------------------------ 3

Outcome convolution() {
  using decisions::GridDensity;
  const double step = 0.001;
  auto a = GridDensity::gaussian(0.01, 0.03, step), b = GridDensity::gaussian(-0.02, 0.05, step),
       c = GridDensity::gaussian(0.0, 0.04, step);
  const auto m = decisions::convolve_margin({a, b, c, {}, {}, 1.0});
  const double target = 0.03 * 0.03 + 0.05 * 0.05 + 0.04 * 0.04;
  const double rel = std::abs(m.variance() - target) / target;

  auto d = decisions::convolve_margin({GridDensity::point_mass(0.013, step), GridDensity::point_mass(-0.052, step),
                                       GridDensity::point_mass(0.21, step), {}, {}});
  double peak = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.mass()[i] > 0.5) peak = d.x(i);
  const double shift = std::abs(peak - (0.013 - 0.052 + 0.21));

  auto e = decisions::convolve_margin({GridDensity::gaussian(0, 0.02, step),
                                       GridDensity::two_point_outage(0.03, 0.1, step),
                                       GridDensity::uniform(-0.25, 0.2, step), {}, {}});
  const double mass = std::max({std::abs(m.total() - 1), std::abs(d.total() - 1), std::abs(e.total() - 1)});
  return {rel <= 1e-3 && shift <= step + 1e-12 && mass <= 1e-9,
          fmt::format("variance rel err {:.2e}, delta offset {:.2e}, mass err {:.2e}", rel, shift, mass)};
}

// ------------------------------------------------------------------ 4

Outcome reserves() {
  using decisions::GridDensity;
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> sd(0.005, 0.08), mean(-0.04, 0.04), slope(0.1, 5), ratio(1.05, 50),
      prob(0.0, 0.05), size(0.01, 0.1);
  const double step = 0.001;
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double hu = slope(rng), hd = slope(rng);
    const double lo = mean(rng) - 0.1, hi = mean(rng) + 0.1;
    decisions::ReserveProblem p{GridDensity::gaussian(mean(rng), sd(rng), step),
                                GridDensity::two_point_outage(prob(rng), size(rng), step),
                                GridDensity::uniform(lo, hi, step),
                                {hu, hu * ratio(rng)},
                                {hd, hd * ratio(rng)}};
    const auto d = decisions::optimal_reserves(p, decisions::convolve_margin(p));
    worst = std::max({worst, std::abs(d.q_up - d.grid_q_up), std::abs(d.q_down - d.grid_q_down)});
  }
  return {worst <= step + 1e-12, fmt::format("50 problems, max |quantile - grid| {:.4f}", worst)};
}

// ------------------------------------------------------------------ 5

Outcome copula_calibration() {
  const MultivariateTarget target(SiteSet({"a", "b"}, {1.0, 1.0}), LeadTimeSet(kStart, 3));
  copula::Marginals f = {prob::ParametricDensity::truncated_gaussian(0.3, 0.15),
                         prob::ParametricDensity::beta(2.0, 5.0),
                         prob::ParametricDensity::censored_gaussian(0.1, 0.2),
                         prob::ParametricDensity::beta(4.0, 1.5),
                         prob::ParametricDensity::truncated_gaussian(0.7, 0.3),
                         prob::QuantileSet({0.1, 0.5, 0.9}, {0.2, 0.4, 0.8})};
  const auto set = copula::sample_trajectories(target, f, copula::LatentCovariance::identity(6), 10000, 505);
  double min_p = 1.0;
  for (std::size_t cell = 0; cell < 6; ++cell) {
    std::vector<prob::PredictiveCDF> fc(set.size(), f[cell]);
    std::vector<double> y;
    for (const auto& path : set.paths) y.push_back(path[cell]);
    min_p = std::min(min_p, verify::ks_uniform(verify::pit(fc, y, 7 + cell)).p_value);
  }

  const int dim = 8;
  std::mt19937_64 rng(105);
  std::normal_distribution<double> z(0, 1);
  Eigen::MatrixXd a(dim, dim + 2);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = z(rng);
  Eigen::MatrixXd c = a * a.transpose();
  Eigen::VectorXd s = c.diagonal().cwiseSqrt().cwiseInverse();
  c = s.asDiagonal() * c * s.asDiagonal();
  const auto draws = copula::sample_latent(copula::LatentCovariance(c), 10000, 506);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(draws.size()), dim);
  for (std::size_t i = 0; i < draws.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = draws[i].transpose();
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  Eigen::VectorXd inv = cov.diagonal().cwiseSqrt().cwiseInverse();
  const double err = ((inv.asDiagonal() * cov * inv.asDiagonal()) - c).cwiseAbs().maxCoeff();
  return {min_p > 0.01 && err <= 0.05,
          fmt::format("identity copula min KS p {:.3f} over 6 cells; max |corr - target| {:.4f}", min_p, err)};
}

// ------------------------------------------------------------------ 6

Outcome qr_calibration() {
  // Operating range kept inside the cubic section of the curve.
  auto cfg = single_site(10.0, 0.6, 106);
  const std::size_t train = 12000, test = 5000, lead = 6;
  const auto r = sim::simulate(cfg, train + test + 100);
  point::ModelSpec spec;
  spec.lags = {1, 2};
  spec.max_lead = static_cast<int>(lead);
  spec.mode = point::HorizonMode::Direct;
  const auto model = point::fit(spec, r.power, 0);

  auto rows = [&](std::size_t from, std::size_t to, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (std::size_t t = from; t < to; ++t) {
      const auto obs = r.power.get(t + lead, 0);
      if (!obs) continue;
      const double yhat = point::predict_point(model, r.power, t)[lead - 1];
      xs.push_back(app::quantile_features(yhat));
      ys.push_back(*obs);
    }
    x.resize(static_cast<Eigen::Index>(xs.size()), 3);
    y.resize(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
      y(static_cast<Eigen::Index>(i)) = ys[i];
    }
  };
  Eigen::MatrixXd xtr, xte;
  Eigen::VectorXd ytr, yte;
  rows(2, train, xtr, ytr);
  rows(train, train + test, xte, yte);
  const std::vector<double> levels = {0.1, 0.25, 0.5, 0.75, 0.9};
  const auto qr = prob::fit_adaptive_qr(xtr, ytr, levels);
  std::vector<std::vector<double>> q;
  for (Eigen::Index i = 0; i < xte.rows(); ++i) q.push_back(qr.predict(xte.row(i).transpose()).values());
  std::vector<double> y(yte.data(), yte.data() + yte.size());
  const auto table = verify::reliability(q, y, levels);
  double worst = 0;
  std::string cover;
  for (const auto& row : table) {
    worst = std::max(worst, std::abs(row.coverage - row.alpha));
    cover += fmt::format(" {:.3f}", row.coverage);
  }
  return {worst <= 0.02 && y.size() == test,
          fmt::format("{} test points, coverage{} (max dev {:.4f})", y.size(), cover, worst)};
}

// ------------------------------------------------------------------ 7

Outcome model_recovery() {
  const std::size_t n = 10000;
  std::mt19937_64 rng(107);
  std::normal_distribution<double> e(0.0, 0.03);
  std::vector<double> y(n);
  double x = 0.5;
  for (auto& v : y) {
    x = 0.5 + 0.9 * (x - 0.5) + e(rng);
    v = x;
  }
  std::vector<TimePoint> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = kStart + Hours{static_cast<long>(i)};
  const SpaceTimeSeries data(SiteSet({"a"}, {1.0}), times, y);

  point::ModelSpec spec;
  spec.lags = {1};
  spec.max_lead = 1;
  const auto ar = point::fit(spec, data, 0);
  const double phi = ar.leads[0].coefficients[0](1);

  const auto rls = point::fit_recursive(spec, data, 0, 1.0);
  const double rls_gap = (rls.model.leads[0].coefficients[0] - ar.leads[0].coefficients[0]).cwiseAbs().maxCoeff();

  auto tar_spec = spec;
  tar_spec.family = point::ModelFamily::TAR;
  const auto tar = point::fit(tar_spec, data, 0);
  const bool identical = tar.leads[0].coefficients[0] == ar.leads[0].coefficients[0];
  return {std::abs(phi - 0.9) <= 0.03 && rls_gap <= 1e-6 && identical,
          fmt::format("AR(1) phi {:.4f}; |RLS - OLS| {:.2e}; TAR(R=1) == AR {}", phi, rls_gap, identical)};
}

// ------------------------------------------------------------------ 8

Outcome forecast_skill() {
  auto cfg = single_site(9.0, 1.2, 108);
  const std::size_t train = 10000, test = 6000;
  const int lead = 24;
  const auto r = sim::simulate(cfg, train + test + 48);
  const auto nwp = sim::synthesize_nwp(r, 0, 43, 6, 0.0, 1);
  point::ModelSpec spec;
  spec.family = point::ModelFamily::CPARX;
  spec.lags = {1};
  spec.max_lead = 43;
  const auto head = r.power.slice(0, train);
  const auto model = point::fit(spec, head, 0, &nwp);
  std::vector<double> f_cp, f_pers, obs;
  for (std::size_t t = train; t < train + test; ++t) {
    const auto* run = nwp.find(r.power.times()[t]);
    const auto y = r.power.get(t + lead, 0);
    if (!run || !y) continue;
    f_cp.push_back(point::predict_point(model, r.power, t, run)[lead - 1]);
    f_pers.push_back(point::persistence(r.power, 0, t, lead)[lead - 1]);
    obs.push_back(*y);
  }
  const double cp = verify::point_metrics(f_cp, obs).rmse, pers = verify::point_metrics(f_pers, obs).rmse;
  const double gain = 1.0 - cp / pers;
  return {gain >= 0.2, fmt::format("k=24 RMSE CP-ARX {:.4f} vs persistence {:.4f} over {} origins, improvement {:.1f}%",
                                   cp, pers, obs.size(), 100 * gain)};
}

// ------------------------------------------------------------------ 9

Outcome score_identities() {
  bool ok = true;
  double worst_crps = 0;
  for (double f : {0.0, 0.3, 0.8})
    for (double y : {0.0, 0.5, 1.0})
      worst_crps = std::max(worst_crps, std::abs(verify::crps(prob::DiscreteDistribution::point_mass(f), y) -
                                                 std::abs(f - y)));
  ok = ok && worst_crps <= 1e-12;
  std::vector<double> y = {0.1, 0.4, 0.9};
  const double pin = verify::pinball(y, y, 0.3);
  ok = ok && pin == 0.0;

  copula::TrajectorySet degenerate;
  degenerate.leads = 3;
  degenerate.sites = {"a"};
  degenerate.paths = {{0.2, 0.2, 0.2}, {0.2, 0.2, 0.2}};
  const double es = verify::energy_score(degenerate, y);
  const double dist = std::sqrt(0.01 + 0.04 + 0.49);
  ok = ok && std::abs(es - dist) <= 1e-12;

  std::mt19937_64 rng(109);
  std::normal_distribution<double> z(0.5, 0.15);
  copula::TrajectorySet one;
  one.leads = 1;
  one.sites = {"a"};
  std::vector<double> members;
  for (int j = 0; j < 2000; ++j) {
    members.push_back(z(rng));
    one.paths.push_back({members.back()});
  }
  double reduce = 0;
  for (double obs : {0.1, 0.5, 0.8})
    reduce = std::max(reduce, std::abs(verify::energy_score(one, std::vector<double>{obs}) -
                                       verify::crps_ensemble(members, obs)));
  ok = ok && reduce <= 1e-3;
  return {ok, fmt::format("CRPS(point mass) err {:.1e}; pinball(perfect) {}; ES degenerate err {:.1e}; "
                          "ES vs sample CRPS {:.1e}",
                          worst_crps, pin, std::abs(es - dist), reduce)};
}

// ------------------------------------------------------------------ 10

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = buf.str();
  }
  return files;
}

Outcome determinism() {
  auto config = app::default_config();
  const fs::path out = fs::temp_directory_path() / "windcast_acceptance";
  config.run.out = out;
  const app::RunOptions options{false, std::max(1u, std::thread::hardware_concurrency())};
  std::vector<double> times;
  std::vector<std::map<std::string, std::string>> runs;
  for (int i = 0; i < 2; ++i) {
    fs::remove_all(out);
    const auto t0 = Clock::now();
    app::run_pipeline(config, options);
    times.push_back(seconds_since(t0));
    runs.push_back(snapshot(out));
  }
  fs::remove_all(out);
  std::size_t bytes = 0;
  for (const auto& [name, body] : runs[0]) bytes += body.size();
  const bool same = runs[0] == runs[1];
  const auto trajectories = runs[0].count("trajectories/trajectories.csv");
  const bool fast = times[0] < 60.0 && times[1] < 60.0;
  return {same && fast && trajectories == 1 && config.model.spec.max_lead == 43 &&
              config.copula.trajectories == 12 && config.sites.size() == 5 && config.run.hours == 16000,
          fmt::format("{} files ({} bytes) identical: {}; run times {:.1f} s, {:.1f} s", runs[0].size(), bytes,
                      same, times[0], times[1])};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"newsvendor optimality", newsvendor},
      {"settlement identity", settlement},
      {"convolution oracle", convolution},
      {"reserve quantile vs grid search", reserves},
      {"copula calibration", copula_calibration},
      {"quantile-regression calibration", qr_calibration},
      {"model recovery", model_recovery},
      {"forecast skill ordering", forecast_skill},
      {"score identities", score_identities},
      {"end-to-end determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass) ++failures;
    std::cout << fmt::format("{} criterion {}: {}: {}", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
