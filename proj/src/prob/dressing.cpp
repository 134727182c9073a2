#include "windcast/prob/dressing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "windcast/core/error.hpp"

namespace windcast::prob {

double empirical_quantile(const std::vector<double>& sorted, double alpha) {
  if (sorted.empty()) throw DataError("empirical quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * alpha;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ErrorClimatology::ErrorClimatology(int max_lead, std::size_t min_count)
    : max_lead_(max_lead), min_count_(min_count) {
  if (max_lead < 1) throw std::invalid_argument("climatology needs max_lead >= 1");
  const int buckets = lead_bucket(max_lead) + 1;
  errors_.resize(static_cast<std::size_t>(buckets * kLevelBins));
  pooled_.resize(static_cast<std::size_t>(buckets));
}

int ErrorClimatology::level_bin(double point) {
  return std::clamp(static_cast<int>(point * kLevelBins), 0, kLevelBins - 1);
}

int ErrorClimatology::lead_bucket(int lead) { return (lead - 1) / kLeadBucketHours; }

void ErrorClimatology::add(double point, int lead, double observed) {
  if (lead < 1 || lead > max_lead_) throw std::out_of_range("lead outside climatology range");
  const double e = observed - point;
  const auto b = static_cast<std::size_t>(lead_bucket(lead));
  errors_[b * kLevelBins + static_cast<std::size_t>(level_bin(point))].push_back(e);
  pooled_[b].push_back(e);
  finalized_ = false;
}

void ErrorClimatology::finalize() {
  for (auto& v : errors_) std::sort(v.begin(), v.end());
  for (auto& v : pooled_) std::sort(v.begin(), v.end());
  finalized_ = true;
}

std::size_t ErrorClimatology::count(int level, int bucket) const {
  return errors_.at(static_cast<std::size_t>(bucket * kLevelBins + level)).size();
}

const std::vector<double>& ErrorClimatology::bin(int level, int bucket) const {
  return errors_.at(static_cast<std::size_t>(bucket * kLevelBins + level));
}

ErrorClimatology::Dressed ErrorClimatology::dress(double point, int lead,
                                                  const std::vector<double>& levels) const {
  if (lead < 1 || lead > max_lead_) throw std::out_of_range("lead outside climatology range");
  if (!finalized_) throw std::logic_error("climatology must be finalized before dressing");
  const int bucket = lead_bucket(lead);
  const auto& own = bin(level_bin(point), bucket);
  const bool fallback = own.size() < min_count_;
  const auto& errs = fallback ? pooled_.at(static_cast<std::size_t>(bucket)) : own;
  if (errs.empty()) throw DataError("no forecast errors recorded for this lead bucket");
  std::vector<double> q;
  q.reserve(levels.size());
  for (double a : levels) q.push_back(point + empirical_quantile(errs, a));
  return {QuantileSet(levels, std::move(q)), fallback};
}

}  // namespace windcast::prob
