#include "windcast/verify/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/csv.hpp"
#include "windcast/core/error.hpp"
#include "windcast/core/random.hpp"

namespace windcast::verify {

namespace {

std::vector<ReliabilityRow> coverage_rows(const std::vector<std::vector<double>>& quantiles,
                                          std::span<const double> y, const std::vector<double>& levels,
                                          const std::vector<std::size_t>& cases, const std::string& bin) {
  std::vector<ReliabilityRow> rows;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::size_t hit = 0;
    for (auto i : cases)
      if (y[i] <= quantiles[i].at(l)) ++hit;
    rows.push_back({levels[l], cases.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(cases.size()),
                    cases.size(), bin});
  }
  return rows;
}

void check_inputs(const std::vector<std::vector<double>>& quantiles, std::span<const double> y,
                  const std::vector<double>& levels) {
  if (quantiles.size() != y.size()) throw std::invalid_argument("forecasts and observations differ in length");
  for (const auto& q : quantiles)
    if (q.size() != levels.size()) throw std::invalid_argument("one quantile per level required");
}

}  // namespace

std::vector<ReliabilityRow> reliability(const std::vector<std::vector<double>>& quantiles,
                                        std::span<const double> y, const std::vector<double>& levels,
                                        std::size_t min_count) {
  check_inputs(quantiles, y, levels);
  if (y.size() < min_count)
    throw DataError(fmt::format("insufficient sample: {} pairs, need {}", y.size(), min_count));
  std::vector<std::size_t> all(y.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return coverage_rows(quantiles, y, levels, all, "");
}

std::vector<ReliabilityRow> conditional_reliability(const std::vector<std::vector<double>>& quantiles,
                                                    std::span<const double> y,
                                                    const std::vector<double>& levels,
                                                    const std::vector<std::string>& bins) {
  check_inputs(quantiles, y, levels);
  if (bins.size() != y.size()) throw std::invalid_argument("one bin label per case required");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < bins.size(); ++i) groups[bins[i]].push_back(i);
  std::vector<ReliabilityRow> rows;
  for (const auto& [bin, cases] : groups) {
    auto r = coverage_rows(quantiles, y, levels, cases, bin);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return rows;
}

std::vector<double> pit(const std::vector<prob::PredictiveCDF>& forecasts, std::span<const double> y,
                        std::uint64_t seed) {
  if (forecasts.size() != y.size()) throw std::invalid_argument("forecasts and observations differ in length");
  auto rng = make_stream({seed});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  out.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double hi = prob::cdf_eval(forecasts[i], y[i]);
    const double lo = prob::cdf_left(forecasts[i], y[i]);
    const double v = u(rng);
    out.push_back(hi > lo ? lo + v * (hi - lo) : hi);
  }
  return out;
}

KsResult ks_uniform(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double x = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
  }
  // Asymptotic Kolmogorov distribution with the Stephens small-sample correction.
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return {d, 1.0};
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

void write_reliability(std::ostream& out, const std::vector<ReliabilityRow>& rows) {
  const bool binned = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return !r.bin.empty(); });
  out << (binned ? "alpha,coverage,n,bin\n" : "alpha,coverage,n\n");
  for (const auto& r : rows) {
    out << fmt::format("{},{},{}", csv::fmt_double(r.alpha), csv::fmt_double(r.coverage), r.n);
    if (binned) out << ',' << r.bin;
    out << '\n';
  }
}

void write_reliability(const std::filesystem::path& path, const std::vector<ReliabilityRow>& rows) {
  auto out = csv::open_out(path);
  write_reliability(out, rows);
}

}  // namespace windcast::verify
