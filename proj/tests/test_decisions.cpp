#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "windcast/core/error.hpp"
#include "windcast/decisions/market.hpp"
#include "windcast/decisions/reserves.hpp"

using namespace windcast;
using namespace windcast::decisions;

namespace {

Prices from_costs(double down, double up, double day_ahead = 40.0) {
  return {day_ahead, day_ahead + up, day_ahead - down};
}

prob::DiscreteDistribution random_discrete(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> count(1, 8);
  const int n = count(rng);
  std::vector<double> pts, w;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    pts.push_back(u(rng));
    w.push_back(u(rng) + 0.01);
    total += w.back();
  }
  for (double& v : w) v /= total;
  return {pts, w};
}

// E[cost] of a bid under a discrete distribution, summed atom by atom.
double brute_expected_cost(const prob::DiscreteDistribution& d, const Prices& p, double bid) {
  double e = 0;
  for (std::size_t i = 0; i < d.points().size(); ++i) {
    const double diff = d.points()[i] - bid;
    e += d.probs()[i] * (diff >= 0 ? p.unit_cost_down() * diff : -p.unit_cost_up() * diff);
  }
  return e;
}

}  // namespace

TEST(Bid, SymmetricCostsBidTheMedian) {
  prob::PredictiveCDF f = prob::ParametricDensity::beta(2.0, 5.0);
  auto b = optimal_bid(f, from_costs(7, 7), 13);
  EXPECT_DOUBLE_EQ(b.alpha, 0.5);
  EXPECT_EQ(b.value, prob::cdf_inverse(f, 0.5));
  EXPECT_EQ(b.lead, 13);
}

TEST(Bid, LevelFromUnitCostRatio) {
  EXPECT_DOUBLE_EQ(bid_level(from_costs(10, 30)), 0.25);
  EXPECT_THROW(bid_level(from_costs(0, 0)), NumericError);
  EXPECT_THROW(bid_level({40, 30, 35}), std::invalid_argument);
}

TEST(Bid, QuantileBidMinimizesExpectedCost) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> cost(0.1, 50);
  for (int rep = 0; rep < 30; ++rep) {
    auto d = random_discrete(rng);
    auto p = from_costs(cost(rng), cost(rng));
    auto b = optimal_bid(d, p);
    const double at_bid = brute_expected_cost(d, p, b.value);
    double best = INFINITY;
    for (int i = 0; i <= 1000; ++i) best = std::min(best, brute_expected_cost(d, p, i / 1000.0));
    EXPECT_LE(at_bid, best + 1e-6);
    EXPECT_NEAR(expected_imbalance_cost(d, p, b.value), at_bid, 1e-12);
  }
}

TEST(Bid, MonotoneInDownwardCost) {
  prob::PredictiveCDF f = prob::ParametricDensity::censored_gaussian(0.3, 0.2);
  double previous = -1;
  for (double down = 0.5; down < 60; down *= 1.3) {
    auto b = optimal_bid(f, from_costs(down, 10));
    EXPECT_GE(b.value, previous);
    previous = b.value;
  }
}

TEST(ExpectedCost, DegenerateAndUniformCases) {
  prob::PredictiveCDF mass = prob::DiscreteDistribution::point_mass(0.6);
  auto p = from_costs(4, 9);
  EXPECT_EQ(expected_imbalance_cost(mass, p, 0.6), 0.0);
  EXPECT_NEAR(expected_imbalance_cost(mass, p, 0.6 - 0.15), 4 * 0.15, 1e-15);
  prob::PredictiveCDF uniform = prob::ParametricDensity::beta(1.0, 1.0);
  EXPECT_NEAR(expected_imbalance_cost(uniform, from_costs(1, 1), 0.5), 0.25, 1e-6);
  // Smooth density against its closed form: E|U - c| for U uniform.
  for (double c : {0.1, 0.37, 0.8})
    EXPECT_NEAR(expected_imbalance_cost(uniform, from_costs(1, 1), c), 0.5 * (c * c + (1 - c) * (1 - c)),
                1e-6);
}

TEST(Settle, ZeroImbalanceAndSurplusArithmetic) {
  auto p = from_costs(5, 12, 30);
  auto r = settle(0.4, 0.4, p);
  EXPECT_EQ(r.balancing_cost, 0.0);
  EXPECT_EQ(r.total, 30 * 0.4);
  auto s = settle(0.5, 0.4, p);
  EXPECT_NEAR(s.balancing_cost, 0.5, 1e-14);
  EXPECT_NEAR(s.imbalance, 0.1, 1e-15);
}

TEST(Settle, IdentityNonNegativityAndUpperBound) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1), price(0, 80), cost(0, 30);
  for (int i = 0; i < 20000; ++i) {
    const double y = u(rng), bid = u(rng);
    auto p = from_costs(cost(rng), cost(rng), price(rng));
    auto r = settle(y, bid, p);
    ASSERT_EQ(r.total, r.day_ahead_revenue - r.balancing_cost);
    ASSERT_GE(r.balancing_cost, 0.0);
    ASSERT_LE(r.total, p.day_ahead * y);
    auto perfect = settle(y, y, p);
    ASSERT_EQ(perfect.total, p.day_ahead * y);
  }
}

TEST(Settle, OptimalBidDominatesFixedLevels) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shape(1.0, 6.0), cost(0.5, 30);
  const int n = 10000;
  std::vector<double> optimal(n);
  std::vector<std::vector<double>> fixed(9, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    prob::PredictiveCDF f = prob::ParametricDensity::beta(shape(rng), shape(rng));
    auto p = from_costs(cost(rng), cost(rng));
    std::uniform_real_distribution<double> u(1e-12, 1.0);
    const double y = prob::cdf_inverse(f, u(rng));
    optimal[i] = settle(y, optimal_bid(f, p).value, p).total;
    for (int a = 1; a <= 9; ++a) fixed[a - 1][i] = settle(y, prob::cdf_inverse(f, a / 10.0), p).total;
  }
  for (const auto& other : fixed) {
    double mean = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const double d = optimal[i] - other[i];
      mean += d;
      sq += d * d;
    }
    mean /= n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    EXPECT_GE(mean, -2.0 * se);
  }
}

TEST(Trajectories, ExpectedCostIsPathAverage) {
  copula::TrajectorySet set;
  set.sites = {"a"};
  set.leads = 2;
  set.paths = {{0.2, 0.6}, {0.4, 0.4}};
  MarketPrices mp{parse_utc("2007-01-01T12:00:00Z"), {1, 2}, {from_costs(2, 3), from_costs(1, 5)}};
  std::vector<Bid> bids = {{1, 0.5, 0.3}, {2, 0.5, 0.5}};
  // Path 1: 3*0.1 + 1*0.1; path 2: 2*0.1 + 5*0.1.
  EXPECT_NEAR(expected_cost_over_trajectories(set, 0, bids, mp), 0.5 * (0.4 + 0.7), 1e-14);
}

TEST(Prices, SyntheticCostsPositiveAndPersistence) {
  const auto origin = parse_utc("2007-01-01T12:00:00Z");
  MarketSpec spec;
  auto mp = synthetic_prices(origin, spec.leads(), 5);
  ASSERT_EQ(mp.prices.size(), 25u);
  for (const auto& p : mp.prices) {
    EXPECT_GE(p.unit_cost_down(), 0.0);
    EXPECT_GE(p.unit_cost_up(), 0.0);
  }
  auto next = persistence_forecast(mp, origin + Hours{24});
  EXPECT_EQ(next.origin, origin + Hours{24});
  for (std::size_t i = 0; i < mp.prices.size(); ++i) {
    EXPECT_EQ(next.prices[i].unit_cost_down(), mp.prices[i].unit_cost_down());
    EXPECT_EQ(next.prices[i].unit_cost_up(), mp.prices[i].unit_cost_up());
  }
  std::stringstream buf;
  write_prices(buf, {mp});
  auto back = read_prices(buf);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].leads, mp.leads);
  EXPECT_EQ(back[0].prices[3].balancing_buy, mp.prices[3].balancing_buy);
  EXPECT_THROW(mp.at(40), DataError);
}

TEST(Prices, BidFileRoundTrip) {
  std::vector<BidRecord> bids = {{parse_utc("2007-01-01T12:00:00Z"), {13, 0.25, 1.0 / 3.0}}};
  std::stringstream buf;
  write_bids(buf, bids);
  auto back = read_bids(buf);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].bid.value, 1.0 / 3.0);
  EXPECT_EQ(back[0].bid.alpha, 0.25);
}

TEST(MarketSpec, DefaultsMirrorGateClosure) {
  MarketSpec s;
  EXPECT_EQ(s.gate_closure_offset, 12);
  EXPECT_EQ(s.leads().front(), 13);
  EXPECT_EQ(s.leads().back(), 37);
  s.first_lead = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Convolution, DeltaSumAndIdentity) {
  const double step = 0.001;
  ReserveProblem p{GridDensity::point_mass(0.013, step), GridDensity::point_mass(-0.05, step),
                   GridDensity::point_mass(0.2, step), {}, {}};
  auto m = convolve_margin(p);
  double at = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.mass()[i] > 0) at = m.x(i);
  EXPECT_NEAR(at, 0.163, step);
  EXPECT_NEAR(m.total(), 1.0, 1e-9);

  auto u = GridDensity::uniform(-0.1, 0.1, step);
  ReserveProblem id{u, GridDensity::point_mass(0.0, step), GridDensity::point_mass(0.0, step), {}, {}};
  auto out = convolve_margin(id);
  ASSERT_EQ(out.size(), u.size());
  EXPECT_NEAR(out.first(), u.first(), 1e-12);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(out.mass()[i], u.mass()[i], 1e-15);
}

TEST(Convolution, GaussianVariancesAdd) {
  const double step = 0.001;
  auto a = GridDensity::gaussian(0, 0.05, step), b = GridDensity::gaussian(0, 0.08, step);
  auto c = convolve(a, b);
  EXPECT_NEAR(c.variance(), 0.05 * 0.05 + 0.08 * 0.08, 1e-3 * (0.05 * 0.05 + 0.08 * 0.08));
  EXPECT_NEAR(c.total(), 1.0, 1e-9);
}

TEST(Convolution, CommutesAndConservesMass) {
  const double step = 0.001;
  auto l = GridDensity::gaussian(0.01, 0.02, step);
  auto g = GridDensity::two_point_outage(0.05, 0.1, step);
  auto w = GridDensity::uniform(-0.2, 0.15, step);
  auto a = convolve_margin({l, g, w, {}, {}});
  auto b = convolve_margin({w, l, g, {}, {}});
  ASSERT_EQ(a.size(), b.size());
  EXPECT_NEAR(a.first(), b.first(), 1e-12);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.mass()[i], b.mass()[i], 1e-12);
  EXPECT_NEAR(a.total(), 1.0, 1e-9);
  EXPECT_THROW(convolve(l, GridDensity::point_mass(0, 0.002)), DataError);
}

TEST(Reserves, SplitPartsAndSymmetry) {
  const double step = 0.001;
  auto margin = GridDensity::gaussian(0.0, 0.05, step);
  ReserveProblem p{GridDensity::point_mass(0, step), GridDensity::point_mass(0, step), margin,
                   {1.0, 20.0}, {1.0, 20.0}};
  auto m = convolve_margin(p);
  auto parts = split(m);
  EXPECT_NEAR(parts.positive.total(), 1.0, 1e-9);
  EXPECT_NEAR(parts.negative.total(), 1.0, 1e-9);
  auto d = optimal_reserves(p, m);
  EXPECT_NEAR(d.q_up, d.q_down, 1e-12);
  EXPECT_GT(d.q_up, 0.0);
}

TEST(Reserves, FreeHoldingCoversFullSupport) {
  const double step = 0.001;
  auto w = GridDensity::uniform(-0.2, 0.1, step);
  ReserveProblem p{GridDensity::point_mass(0, step), GridDensity::point_mass(0, step), w,
                   {0.0, 5.0}, {0.0, 5.0}};
  auto d = optimal_reserves(p, convolve_margin(p));
  EXPECT_NEAR(d.q_up, 0.2, 1e-9);
  EXPECT_NEAR(d.q_down, 0.1, 1e-9);
  EXPECT_THROW(ReserveCost({5.0, 5.0}).validate(), std::invalid_argument);
}

TEST(Reserves, QuantileAgreesWithGridSearch) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> sd(0.005, 0.1), mean(-0.05, 0.05), slope(0.1, 5), ratio(1.1, 40);
  const double step = 0.001;
  for (int rep = 0; rep < 20; ++rep) {
    const double h_up = slope(rng), h_down = slope(rng);
    ReserveProblem p{GridDensity::gaussian(mean(rng), sd(rng), step),
                     GridDensity::two_point_outage(0.02, 0.05, step),
                     GridDensity::uniform(mean(rng) - 0.1, mean(rng) + 0.1, step),
                     {h_up, h_up * ratio(rng)},
                     {h_down, h_down * ratio(rng)}};
    auto m = convolve_margin(p);
    auto d = optimal_reserves(p, m);
    EXPECT_LE(std::abs(d.q_up - d.grid_q_up), step + 1e-12);
    EXPECT_LE(std::abs(d.q_down - d.grid_q_down), step + 1e-12);
    auto parts = split(m);
    // Independent brute force over every grid point.
    double best = INFINITY, best_q = 0;
    for (std::size_t i = 0; i < parts.negative.size(); ++i) {
      const double q = parts.negative.x(i);
      const double e = expected_reserve_cost(parts.negative, p.up, q);
      if (e < best - 1e-15) {
        best = e;
        best_q = q;
      }
    }
    EXPECT_LE(std::abs(d.q_up - best_q), step + 1e-12);
  }
}

TEST(Reserves, FromSamplesHistogram) {
  std::vector<double> s = {0.0, 0.0011, -0.0009, 0.0021};
  auto g = GridDensity::from_samples(s, 0.001);
  EXPECT_NEAR(g.total(), 1.0, 1e-15);
  EXPECT_NEAR(g.mean(), (0.0 + 0.001 - 0.001 + 0.002) / 4.0, 1e-12);
}
