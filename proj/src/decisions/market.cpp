#include "windcast/decisions/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"
#include "windcast/core/random.hpp"

namespace windcast::decisions {

void Prices::validate() const {
  if (!std::isfinite(day_ahead) || !std::isfinite(balancing_buy) || !std::isfinite(balancing_sell))
    throw std::invalid_argument("prices must be finite");
  if (unit_cost_down() < 0.0 || unit_cost_up() < 0.0)
    throw std::invalid_argument(
        "two-price settlement requires pi_s <= pi_c <= pi_b (nonnegative unit costs)");
}

const Prices& MarketPrices::at(int lead) const {
  auto it = std::find(leads.begin(), leads.end(), lead);
  if (it == leads.end())
    throw DataError(fmt::format("no prices for lead {} at origin {}", lead, format_utc(origin)));
  return prices[static_cast<std::size_t>(it - leads.begin())];
}

void MarketSpec::validate() const {
  if (gate_closure_offset < 1) throw std::invalid_argument("gate closure offset must be positive");
  if (first_lead < 1 || last_lead < first_lead)
    throw std::invalid_argument("delivery leads must be consecutive and >= 1");
}

std::vector<int> MarketSpec::leads() const {
  std::vector<int> out;
  for (int k = first_lead; k <= last_lead; ++k) out.push_back(k);
  return out;
}

double bid_level(const Prices& prices) {
  prices.validate();
  const double down = prices.unit_cost_down(), up = prices.unit_cost_up();
  if (down + up <= 0.0)
    throw NumericError("both regulation unit costs are zero: the bidding objective is flat");
  return down / (down + up);
}

Bid optimal_bid(const prob::PredictiveCDF& f, const Prices& prices, int lead) {
  const double alpha = bid_level(prices);
  double value;
  // Degenerate levels: any bid at the support edge is optimal.
  if (alpha <= 0.0)
    value = 0.0;
  else if (alpha >= 1.0)
    value = 1.0;
  else
    value = prob::cdf_inverse(f, alpha);
  return {lead, alpha, value};
}

double imbalance_cost(double y, double bid, const Prices& prices) {
  const double d = y - bid;
  return d >= 0.0 ? prices.unit_cost_down() * d : prices.unit_cost_up() * -d;
}

double expected_imbalance_cost(const prob::PredictiveCDF& f, const Prices& prices, double bid) {
  prices.validate();
  if (!(bid >= 0.0 && bid <= 1.0)) throw std::invalid_argument("bid outside [0,1]");
  return prices.unit_cost_down() * prob::expected_excess(f, bid) +
         prices.unit_cost_up() * prob::expected_shortfall(f, bid);
}

RevenueBreakdown settle(double y, double bid, const Prices& prices) {
  if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("realized power outside [0,1]");
  if (!(bid >= 0.0 && bid <= 1.0)) throw std::invalid_argument("bid outside [0,1]");
  prices.validate();
  const double s = prices.day_ahead * y;
  const double b = imbalance_cost(y, bid, prices);
  return {s, b, s - b, y - bid};
}

double expected_cost_over_trajectories(const copula::TrajectorySet& set, std::size_t site,
                                       const std::vector<Bid>& bids, const MarketPrices& prices) {
  if (set.size() == 0) throw std::invalid_argument("empty trajectory set");
  double total = 0.0;
  for (std::size_t j = 0; j < set.size(); ++j)
    for (const auto& b : bids) {
      if (b.lead < 1 || b.lead > set.leads) throw std::out_of_range("bid lead outside trajectories");
      total += imbalance_cost(set.value(j, site, b.lead), b.value, prices.at(b.lead));
    }
  return total / static_cast<double>(set.size());
}

MarketPrices synthetic_prices(TimePoint origin, const std::vector<int>& leads, std::uint64_t seed) {
  auto rng = make_stream({seed, static_cast<std::uint64_t>(origin.time_since_epoch().count())});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> down_cost(2.0, 4.0), up_cost(2.0, 6.0);
  MarketPrices mp{origin, leads, {}};
  for (int k : leads) {
    const double h = hour_of_day(origin + Hours{k});
    const double c = std::max(5.0, 35.0 + 10.0 * std::sin(2.0 * std::numbers::pi * (h - 8.0) / 24.0) +
                                       3.0 * normal(rng));
    const double down = std::min(down_cost(rng), c);
    const double up = up_cost(rng);
    mp.prices.push_back({c, c + up, c - down});
  }
  return mp;
}

MarketPrices persistence_forecast(const MarketPrices& previous, TimePoint origin) {
  MarketPrices mp = previous;
  mp.origin = origin;
  return mp;
}

void write_prices(std::ostream& out, const std::vector<MarketPrices>& prices) {
  out << "origin,lead_h,pi_c,pi_b,pi_s\n";
  for (const auto& mp : prices) {
    const auto stamp = format_utc(mp.origin);
    for (std::size_t i = 0; i < mp.leads.size(); ++i)
      out << fmt::format("{},{},{},{},{}\n", stamp, mp.leads[i], csv::fmt_double(mp.prices[i].day_ahead),
                         csv::fmt_double(mp.prices[i].balancing_buy),
                         csv::fmt_double(mp.prices[i].balancing_sell));
  }
}

void write_prices(const std::filesystem::path& path, const std::vector<MarketPrices>& prices) {
  auto out = csv::open_out(path);
  write_prices(out, prices);
}

std::vector<MarketPrices> read_prices(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.empty()) throw DataError("empty price file");
  const auto& h = rows[0];
  const auto c_origin = csv::column(h, "origin"), c_lead = csv::column(h, "lead_h"),
             c_c = csv::column(h, "pi_c"), c_b = csv::column(h, "pi_b"), c_s = csv::column(h, "pi_s");
  std::vector<MarketPrices> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != h.size()) throw DataError(fmt::format("price row {}: wrong field count", r + 1));
    const auto origin = parse_utc(row[c_origin]);
    if (out.empty() || out.back().origin != origin) out.push_back({origin, {}, {}});
    Prices p{csv::parse_double(row[c_c], "pi_c"), csv::parse_double(row[c_b], "pi_b"),
             csv::parse_double(row[c_s], "pi_s")};
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw DataError(fmt::format("price row {}: {}", r + 1, e.what()));
    }
    out.back().leads.push_back(static_cast<int>(csv::parse_long(row[c_lead], "lead_h")));
    out.back().prices.push_back(p);
  }
  return out;
}

std::vector<MarketPrices> read_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return read_prices(in);
}

void write_bids(std::ostream& out, const std::vector<BidRecord>& bids) {
  out << "origin,lead_h,alpha,bid\n";
  for (const auto& b : bids)
    out << fmt::format("{},{},{},{}\n", format_utc(b.origin), b.bid.lead, csv::fmt_double(b.bid.alpha),
                       csv::fmt_double(b.bid.value));
}

void write_bids(const std::filesystem::path& path, const std::vector<BidRecord>& bids) {
  auto out = csv::open_out(path);
  write_bids(out, bids);
}

std::vector<BidRecord> read_bids(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.empty()) throw DataError("empty bid file");
  const auto& h = rows[0];
  const auto c_origin = csv::column(h, "origin"), c_lead = csv::column(h, "lead_h"),
             c_alpha = csv::column(h, "alpha"), c_bid = csv::column(h, "bid");
  std::vector<BidRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != h.size()) throw DataError(fmt::format("bid row {}: wrong field count", r + 1));
    out.push_back({parse_utc(row[c_origin]),
                   {static_cast<int>(csv::parse_long(row[c_lead], "lead_h")),
                    csv::parse_double(row[c_alpha], "alpha"), csv::parse_double(row[c_bid], "bid")}});
  }
  return out;
}

std::vector<BidRecord> read_bids(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return read_bids(in);
}

}  // namespace windcast::decisions
