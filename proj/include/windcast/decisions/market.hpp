#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "windcast/copula/copula.hpp"
#include "windcast/core/time.hpp"
#include "windcast/prob/predictive_cdf.hpp"

namespace windcast::decisions {

/// Day-ahead and balancing prices for one delivery hour (currency/MWh).
struct Prices {
  double day_ahead = 0.0;       // pi^c
  double balancing_buy = 0.0;   // pi^b
  double balancing_sell = 0.0;  // pi^s

  /// pi_down = pi^c - pi^s (surplus), pi_up = pi^b - pi^c (deficit).
  double unit_cost_down() const { return day_ahead - balancing_sell; }
  double unit_cost_up() const { return balancing_buy - day_ahead; }
  /// Throws std::invalid_argument when a unit cost is negative.
  void validate() const;
};

/// Prices per delivery lead for one market day.
struct MarketPrices {
  TimePoint origin;
  std::vector<int> leads;
  std::vector<Prices> prices;

  const Prices& at(int lead) const;
};

struct MarketSpec {
  int gate_closure_offset = 12;  // hours before the first delivery hour's day
  int first_lead = 13;
  int last_lead = 37;

  void validate() const;
  std::vector<int> leads() const;
};

struct Bid {
  int lead = 0;
  double alpha = 0.0;
  double value = 0.0;
};

struct RevenueBreakdown {
  double day_ahead_revenue;  // pi^c * y
  double balancing_cost;     // B
  double total;              // R = S - B
  double imbalance;          // y - bid
};

/// Nominal level pi_down / (pi_down + pi_up). Throws NumericError when both
/// unit costs are zero.
double bid_level(const Prices& prices);

Bid optimal_bid(const prob::PredictiveCDF& f, const Prices& prices, int lead = 0);

/// Realized balancing cost: pi_down (y - bid) for surplus, pi_up (bid - y) for deficit.
double imbalance_cost(double y, double bid, const Prices& prices);
double expected_imbalance_cost(const prob::PredictiveCDF& f, const Prices& prices, double bid);

RevenueBreakdown settle(double y, double bid, const Prices& prices);

/// Mean over trajectories of the summed imbalance cost of `bids` (one per lead
/// in `prices`) at one site.
double expected_cost_over_trajectories(const copula::TrajectorySet& set, std::size_t site,
                                       const std::vector<Bid>& bids, const MarketPrices& prices);

/// Synthetic market: daily-shaped day-ahead price and positive random unit
/// costs. Clearly synthetic; stands in for real price data.
MarketPrices synthetic_prices(TimePoint origin, const std::vector<int>& leads, std::uint64_t seed);

/// Persistence price forecaster: tomorrow's unit costs equal today's.
MarketPrices persistence_forecast(const MarketPrices& previous, TimePoint origin);

/// `origin,lead_h,pi_c,pi_b,pi_s`.
void write_prices(std::ostream& out, const std::vector<MarketPrices>& prices);
void write_prices(const std::filesystem::path& path, const std::vector<MarketPrices>& prices);
std::vector<MarketPrices> read_prices(std::istream& in);
std::vector<MarketPrices> read_prices(const std::filesystem::path& path);

struct BidRecord {
  TimePoint origin;
  Bid bid;
};
/// `origin,lead_h,alpha,bid`.
void write_bids(std::ostream& out, const std::vector<BidRecord>& bids);
void write_bids(const std::filesystem::path& path, const std::vector<BidRecord>& bids);
std::vector<BidRecord> read_bids(std::istream& in);
std::vector<BidRecord> read_bids(const std::filesystem::path& path);

}  // namespace windcast::decisions
