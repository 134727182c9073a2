#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <thread>
#include <vector>

#include "windcast/app/config.hpp"
#include "windcast/app/pipeline.hpp"
#include "windcast/copula/copula.hpp"
#include "windcast/core/series.hpp"
#include "windcast/point/model.hpp"
#include "windcast/point/nwp.hpp"
#include "windcast/prob/forecast_io.hpp"
#include "windcast/prob/quantile_regression.hpp"

namespace windcast::app::detail {

namespace fs = std::filesystem;

void require_input(const fs::path& path);

/// Runs body(i) for i in [0, count) on up to `threads` workers. The failure
/// with the lowest index is rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1u, threads));
  if (workers <= 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// 64-bit seed for one (purpose, origin) pair.
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t purpose, TimePoint origin);

struct Inputs {
  SpaceTimeSeries series;
  std::vector<point::NwpArchive> nwp;  // one per site, empty without NWP models

  const point::NwpForecast* nwp_at(std::size_t site, std::size_t row) const;
};

Inputs load_inputs(const RunConfig& config, const Layout& layout);

/// Daily issue rows in [first, last) whose whole window lies before `last`.
std::vector<std::size_t> daily_origins(const RunConfig& config, const Inputs& inputs,
                                       std::size_t first, std::size_t last);

/// Smallest origin row with all lags available.
std::size_t first_usable_row(const point::ModelSpec& spec);

/// In-sample point forecasts on training rows every `every` hours.
struct TrainingCase {
  std::size_t origin;
  std::vector<double> point;
};
std::vector<TrainingCase> training_cases(const point::FittedModel& model, const Inputs& inputs,
                                         std::size_t site, std::size_t train_end, int every);

/// Probabilistic layer fitted per site.
struct ProbModel {
  ProbMethod method = ProbMethod::QuantileRegression;
  std::string site;
  std::vector<double> levels;
  std::vector<prob::AdaptiveQuantileRegression> qr;  // per lead
  prob::Family family = prob::Family::CensoredGaussian;
  double nu = 1.0;
  std::vector<double> variance;  // per lead
};
void save_prob_model(const fs::path& path, const ProbModel& model);
ProbModel load_prob_model(const fs::path& path);

struct OriginForecasts {
  TimePoint origin;
  copula::Marginals marginals;  // site-major over the configured sites and leads
};
/// Groups site-major rows per origin and checks completeness.
std::vector<OriginForecasts> group_by_origin(const std::vector<prob::MarginalForecast>& rows,
                                             const SiteSet& sites, int leads);

MultivariateTarget target_at(const RunConfig& config, TimePoint origin);

std::map<TimePoint, std::vector<double>> read_point_forecasts(const fs::path& path,
                                                              const SiteSet& sites, int leads);

// Observed window for the target, or empty when a cell is missing.
std::vector<double> observed_window(const MultivariateTarget& target, const SpaceTimeSeries& series);

/// Sequential covariance tracking over warm-up then test origins. An origin's
/// latent observation is folded in once its whole window has been observed.
/// `on_test(index, forecasts, covariance)` runs for each test origin before
/// later observations are used. Returns the final covariance.
template <class F>
copula::LatentCovariance track_covariance(const RunConfig& config, const SpaceTimeSeries& series,
                                          const std::vector<OriginForecasts>& warmup,
                                          const std::vector<OriginForecasts>& test, F&& on_test) {
  const std::size_t dim = config.sites.size() * static_cast<std::size_t>(config.model.spec.max_lead);
  auto cov = copula::LatentCovariance::identity(dim, config.copula.smoothing);
  const Hours window{config.model.spec.max_lead};

  std::vector<const OriginForecasts*> order;
  for (const auto& o : warmup) order.push_back(&o);
  for (const auto& o : test) order.push_back(&o);

  std::size_t folded = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    while (folded < i && order[folded]->origin + window <= order[i]->origin) {
      const auto& past = *order[folded++];
      auto y = observed_window(target_at(config, past.origin), series);
      if (!y.empty()) cov.update(copula::to_latent(y, past.marginals, past.origin));
    }
    if (i >= warmup.size()) on_test(i - warmup.size(), *order[i], cov);
  }
  return cov;
}

}  // namespace windcast::app::detail
