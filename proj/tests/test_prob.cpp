#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "windcast/core/error.hpp"
#include "windcast/prob/dressing.hpp"
#include "windcast/prob/forecast_io.hpp"
#include "windcast/prob/normal.hpp"
#include "windcast/prob/parametric.hpp"
#include "windcast/prob/predictive_cdf.hpp"
#include "windcast/prob/quantile_regression.hpp"
#include "windcast/prob/quantile_set.hpp"
#include "windcast/prob/variance_tracker.hpp"

using namespace windcast;
using namespace windcast::prob;

namespace {

std::vector<ParametricDensity> sample_densities() {
  return {
      ParametricDensity::truncated_gaussian(0.3, 0.15),
      ParametricDensity::truncated_gaussian(0.9, 0.3),
      ParametricDensity::censored_gaussian(0.05, 0.1),
      ParametricDensity::censored_gaussian(0.7, 0.2),
      ParametricDensity::generalized_logit_normal(-0.5, 0.8, 1.0),
      ParametricDensity::generalized_logit_normal(1.0, 1.5, 2.0),
      ParametricDensity::beta(2.0, 5.0),
      ParametricDensity::beta(0.7, 0.9),
  };
}

std::vector<PredictiveCDF> sample_cdfs() {
  std::vector<PredictiveCDF> out;
  for (auto& d : sample_densities()) out.emplace_back(d);
  out.emplace_back(QuantileSet({0.1, 0.5, 0.9}, {0.2, 0.4, 0.7}));
  out.emplace_back(QuantileSet({0.05, 0.25, 0.75, 0.95}, {0.0, 0.0, 0.3, 1.0}));
  out.emplace_back(DiscreteDistribution({0.0, 0.4, 1.0}, {0.2, 0.5, 0.3}));
  return out;
}

}  // namespace

TEST(Normal, MatchesReferenceValues) {
  EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  for (double p : {1e-12, 0.01, 0.3, 0.77, 1 - 1e-9}) EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14);
}

TEST(Parametric, DeepCensoringPutsMassAtZero) {
  auto d = ParametricDensity::censored_gaussian(-0.5, 0.1);
  EXPECT_GT(d.mass_at_zero(), 0.999);
  EXPECT_EQ(d.cdf(0.0), d.mass_at_zero());
  EXPECT_EQ(d.cdf_left(0.0), 0.0);
}

TEST(Parametric, BetaFromUniformMoments) {
  auto d = ParametricDensity::beta_from_moments(0.5, 1.0 / 12.0);
  EXPECT_NEAR(d.a(), 1.0, 1e-12);
  EXPECT_NEAR(d.b(), 1.0, 1e-12);
  EXPECT_THROW(ParametricDensity::beta_from_moments(0.5, 0.25), std::invalid_argument);
  EXPECT_THROW(make_parametric(0.5, 0.3, Family::Beta), std::invalid_argument);
}

TEST(Parametric, TruncatedMeanAgreesWithMonteCarlo) {
  auto d = ParametricDensity::truncated_gaussian(0.2, 0.3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.2, 0.3);
  const int n = 1000000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n;) {
    const double x = z(rng);
    if (x < 0.0 || x > 1.0) continue;
    sum += x;
    sq += x * x;
    ++i;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(d.mean(), mean, 3.0 * se);
}

TEST(Parametric, DensityPlusMassesIntegratesToOne) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (const auto& d : sample_densities()) {
    const double interior = integrator.integrate([&](double y) { return d.density(y); }, 0.0, 1.0);
    EXPECT_NEAR(interior + d.mass_at_zero() + d.mass_at_one(), 1.0, 1e-6) << family_name(d.family());
  }
}

TEST(Parametric, MakeParametricMatchesPointMean) {
  for (Family f : {Family::TruncatedGaussian, Family::CensoredGaussian,
                   Family::GeneralizedLogitNormal, Family::Beta}) {
    for (double point : {0.02, 0.2, 0.5, 0.8, 0.97})
      for (double var : {0.0004, 0.004, 0.01}) {
        if (f == Family::Beta && var >= point * (1 - point)) continue;
        auto d = make_parametric(point, var, f, 2.0);
        EXPECT_NEAR(d.mean(), point, 1e-4) << family_name(f) << " " << point << " " << var;
      }
  }
}

TEST(Parametric, GlnTransformedSamplesAreNormal) {
  const double nu = 2.0;
  auto d = ParametricDensity::generalized_logit_normal(0.3, 0.7, nu);
  std::mt19937_64 rng(9);
  const int n = 100000;
  std::vector<double> x(n);
  for (auto& v : x) {
    const double y = d.sample(rng);
    const double p = std::pow(y, nu);
    v = std::log(p / (1 - p));
  }
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double c = v - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double excess = m4 / (m2 * m2) - 3.0;
  EXPECT_NEAR(mean, 0.3, 3 * 0.7 / std::sqrt(n));
  EXPECT_NEAR(skew, 0.0, 3 * std::sqrt(6.0 / n));
  EXPECT_NEAR(excess, 0.0, 3 * std::sqrt(24.0 / n));
}

TEST(Parametric, GlnShapeRecoveredByProfileLikelihood) {
  auto d = ParametricDensity::generalized_logit_normal(0.0, 0.6, 3.0);
  std::mt19937_64 rng(2);
  std::vector<double> y(20000);
  for (auto& v : y) v = d.sample(rng);
  EXPECT_EQ(estimate_gln_shape(y), 3.0);
}

TEST(QuantileSetCdf, LinearInterpolationBetweenNodes) {
  PredictiveCDF f = QuantileSet({0.25, 0.75}, {0.2, 0.6});
  EXPECT_NEAR(cdf_eval(f, 0.4), 0.5, 1e-15);
  EXPECT_NEAR(cdf_inverse(f, 0.5), 0.4, 1e-12);
  EXPECT_EQ(cdf_eval(f, 0.0), 0.0);
  EXPECT_EQ(cdf_eval(f, 1.0), 1.0);
}

TEST(QuantileSetCdf, CrossingQuantilesAreRearranged) {
  QuantileSet q({0.1, 0.3, 0.5, 0.7, 0.9}, {0.2, 0.35, 0.3, 0.5, 0.6});
  EXPECT_TRUE(q.rearranged());
  EXPECT_TRUE(std::is_sorted(q.values().begin(), q.values().end()));
  EXPECT_EQ(rearrange(q.values()), q.values());
  QuantileSet again(q.levels(), q.values());
  EXPECT_FALSE(again.rearranged());
}

TEST(QuantileSetCdf, TailsPinnedToBounds) {
  QuantileSet q({0.05, 0.5, 0.95}, {0.1, 0.4, 0.8});
  EXPECT_NEAR(q.cdf(0.1), 0.05, 1e-12);
  EXPECT_NEAR(q.cdf(0.8), 0.95, 1e-12);
  EXPECT_GT(q.cdf(0.05), 0.0);
  EXPECT_LT(q.cdf(0.05), 0.05);
  EXPECT_LT(q.cdf(0.99), 1.0);
  EXPECT_EQ(q.cdf(1.0), 1.0);
  EXPECT_NEAR(tail_shape_inverse(tail_shape(0.3, 2.5), 2.5), 0.3, 1e-12);
  EXPECT_NEAR(tail_shape(0.3, 0.0), 0.3, 1e-15);
}

TEST(PredictiveCdf, CensoredMassPointInvertsToZero) {
  const double sigma = 0.2;
  const double mu = -sigma * normal_quantile(0.3);
  PredictiveCDF f = ParametricDensity::censored_gaussian(mu, sigma);
  EXPECT_NEAR(cdf_eval(f, 0.0), 0.3, 1e-12);
  EXPECT_EQ(cdf_inverse(f, 0.2), 0.0);
  EXPECT_GT(cdf_inverse(f, 0.31), 0.0);
}

TEST(PredictiveCdf, InverseRoundTripForContinuousCdfs) {
  std::vector<PredictiveCDF> continuous = {
      ParametricDensity::truncated_gaussian(0.4, 0.2), ParametricDensity::beta(2.0, 3.0),
      ParametricDensity::generalized_logit_normal(0.2, 1.0, 1.5),
      QuantileSet({0.1, 0.5, 0.9}, {0.2, 0.4, 0.7})};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (const auto& f : continuous)
    for (int i = 0; i < 100; ++i) {
      const double y = u(rng);
      EXPECT_NEAR(cdf_inverse(f, cdf_eval(f, y)), y, 1e-8);
    }
}

TEST(PredictiveCdf, MonotoneAndGeneralizedInverse) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-4, 1 - 1e-4);
  for (const auto& f : sample_cdfs()) {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double y = i / 1000.0;
      const double c = cdf_eval(f, y);
      EXPECT_GE(c, prev - 1e-15);
      EXPECT_LE(cdf_left(f, y), c + 1e-15);
      prev = c;
    }
    EXPECT_EQ(cdf_eval(f, 1.0), 1.0);
    EXPECT_EQ(cdf_left(f, 0.0), 0.0);
    for (int i = 0; i < 200; ++i) {
      const double a = u(rng);
      const double q = cdf_inverse(f, a);
      EXPECT_GE(cdf_eval(f, q), a - 1e-9);
      EXPECT_LE(cdf_left(f, q), a + 1e-9);
    }
    EXPECT_THROW(cdf_inverse(f, 0.0), std::invalid_argument);
  }
}

TEST(PredictiveCdf, ExpectedExcessMatchesMonteCarlo) {
  for (const auto& f : sample_cdfs()) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    const int n = 200000;
    double excess = 0, shortfall = 0;
    for (int i = 0; i < n; ++i) {
      double p = u(rng);
      while (p <= 0.0) p = u(rng);
      const double y = cdf_inverse(f, p);
      excess += std::max(y - 0.35, 0.0);
      shortfall += std::max(0.35 - y, 0.0);
    }
    EXPECT_NEAR(expected_excess(f, 0.35), excess / n, 3e-3);
    EXPECT_NEAR(expected_shortfall(f, 0.35), shortfall / n, 3e-3);
  }
}

// E[g(Q(U))] for U uniform, by tanh-sinh in the level variable split at the kinks.
template <class G>
double level_integral(const PredictiveCDF& f, G&& g, std::vector<double> cuts) {
  boost::math::quadrature::tanh_sinh<double> ts;
  cuts.push_back(0.0);
  cuts.push_back(1.0);
  if (auto* q = std::get_if<QuantileSet>(&f)) cuts.insert(cuts.end(), q->levels().begin(), q->levels().end());
  if (auto* d = std::get_if<DiscreteDistribution>(&f)) {
    double acc = 0;
    for (double w : d->probs()) cuts.push_back(acc += w);
  }
  if (auto* p = std::get_if<ParametricDensity>(&f)) {
    cuts.push_back(p->mass_at_zero());
    cuts.push_back(1.0 - p->mass_at_one());
  }
  for (double& c : cuts) c = std::clamp(c, 0.0, 1.0);
  std::sort(cuts.begin(), cuts.end());
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-15) continue;
    total += ts.integrate([&](double u) { return g(cdf_inverse(f, std::clamp(u, 1e-300, 1.0 - 1e-16))); },
                          cuts[i], cuts[i + 1]);
  }
  return total;
}

TEST(PredictiveCdf, ExcessAndShortfallMatchQuadratureOracle) {
  auto cdfs = sample_cdfs();
  cdfs.emplace_back(QuantileSet({0.1, 0.3, 0.5, 0.7, 0.9}, {0.0, 0.0, 0.2, 0.21, 0.6}));
  cdfs.emplace_back(QuantileSet({0.2, 0.8}, {0.5, 1.0}));
  for (const auto& f : cdfs)
    for (double c : {0.0, 0.1, 0.35, 0.77, 1.0}) {
      const double fc = cdf_eval(f, c);
      const double excess = level_integral(f, [c](double y) { return std::max(y - c, 0.0); }, {fc});
      const double shortfall = level_integral(f, [c](double y) { return std::max(c - y, 0.0); }, {fc});
      EXPECT_NEAR(expected_excess(f, c), excess, 1e-8) << c;
      EXPECT_NEAR(expected_shortfall(f, c), shortfall, 1e-8) << c;
    }
}

TEST(QuantileSetCdf, MeanAndTailIntegralMatchQuadrature) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double r : {-30.0, -1.0, -5e-5, 0.0, 3e-5, 2.0, 40.0})
    for (double u : {0.3, 1.0}) {
      const double oracle = ts.integrate([r](double v) { return tail_shape(v, r); }, 0.0, u);
      EXPECT_NEAR(tail_shape_integral(u, r), oracle, 1e-12 * std::max(1.0, std::abs(oracle))) << r;
    }
  PredictiveCDF q = QuantileSet({0.05, 0.25, 0.5, 0.75, 0.95}, {0.02, 0.2, 0.3, 0.6, 0.7});
  EXPECT_NEAR(mean(q), level_integral(q, [](double y) { return y; }, {}), 1e-10);
}

TEST(Discrete, ExactMoments) {
  DiscreteDistribution d({0.4, 0.0, 1.0, 0.4}, {0.25, 0.2, 0.3, 0.25});
  EXPECT_EQ(d.points().size(), 3u);
  EXPECT_NEAR(d.mean(), 0.5 * 0.4 + 0.3, 1e-15);
  EXPECT_EQ(d.quantile(0.2), 0.0);
  EXPECT_EQ(d.quantile(0.21), 0.4);
  EXPECT_THROW(DiscreteDistribution({0.1}, {0.5}), std::invalid_argument);
}

TEST(QuantileRegression, UniformNoiseUpperQuantile) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x01(0, 1), noise(-0.1, 0.1);
  const int n = 10000;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1;
    x(i, 1) = x01(rng);
    y(i) = x(i, 1) + noise(rng);
  }
  auto fit = fit_quantile_regression(x, y, 0.9);
  EXPECT_NEAR(fit.coefficients(0), 0.08, 0.01);
  EXPECT_NEAR(fit.coefficients(1), 1.0, 0.02);
}

TEST(QuantileRegression, MedianMatchesLeastSquaresUnderSymmetry) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> x01(0, 1);
  std::normal_distribution<double> noise(0, 0.05);
  const int n = 5000;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1;
    x(i, 1) = x01(rng);
    y(i) = 0.2 + 0.5 * x(i, 1) + noise(rng);
  }
  Eigen::VectorXd ls = x.colPivHouseholderQr().solve(y);
  auto fit = fit_quantile_regression(x, y, 0.5);
  EXPECT_LT((fit.coefficients - ls).cwiseAbs().maxCoeff(), 0.01);
}

TEST(QuantileRegression, CheckLossNotImprovedByPerturbations) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> x01(0, 1);
  std::gamma_distribution<double> noise(2.0, 0.03);
  const int n = 3000;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1;
    x(i, 1) = x01(rng);
    x(i, 2) = x(i, 1) * (1 - x(i, 1));
    y(i) = 0.1 + 0.6 * x(i, 1) + noise(rng);
  }
  for (double alpha : {0.1, 0.5, 0.9})
    for (double forgetting : {1.0, 0.999}) {
      QrOptions opt;
      opt.forgetting = forgetting;
      auto fit = fit_quantile_regression(x, y, alpha, opt);
      const double best = weighted_check_loss(x, y, fit.coefficients, alpha, forgetting);
      std::normal_distribution<double> dir(0, 1);
      for (int r = 0; r < 100; ++r) {
        Eigen::VectorXd d(3);
        for (auto& v : d) v = dir(rng);
        Eigen::VectorXd b = fit.coefficients + 0.01 * d.normalized();
        EXPECT_LE(best, weighted_check_loss(x, y, b, alpha, forgetting));
      }
    }
}

TEST(QuantileRegression, NonConvergenceIsFlagged) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd x(200, 2);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) {
    x(i, 0) = 1;
    x(i, 1) = u(rng);
    y(i) = u(rng);
  }
  QrOptions opt;
  opt.max_iterations = 1;
  auto fit = fit_quantile_regression(x, y, 0.7, opt);
  EXPECT_FALSE(fit.converged);
  EXPECT_EQ(fit.iterations, 1);
  EXPECT_TRUE(fit.coefficients.allFinite());
}

TEST(QuantileRegression, AdaptiveSetIsOrderedAfterRearrangement) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0, 1);
  const int n = 800;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1;
    x(i, 1) = u(rng);
    y(i) = std::clamp(x(i, 1) + 0.1 * (u(rng) - 0.5), 0.0, 1.0);
  }
  std::vector<double> levels = {0.1, 0.3, 0.5, 0.7, 0.9};
  auto qr = fit_adaptive_qr(x, y, levels);
  for (double v = 0; v <= 1.0; v += 0.05) {
    auto q = qr.predict(Eigen::Vector2d(1.0, v));
    EXPECT_TRUE(std::is_sorted(q.values().begin(), q.values().end()));
  }
  EXPECT_THROW(fit_adaptive_qr(x.topRows(40), y.head(40), levels), DataError);
  EXPECT_NEAR(check_loss(-2.0, 0.25), 1.5, 1e-15);
  EXPECT_NEAR(check_loss(2.0, 0.25), 0.5, 1e-15);
}

TEST(Dressing, ZeroErrorsGiveDegenerateQuantiles) {
  ErrorClimatology c(12, 10);
  for (int i = 0; i < 500; ++i) c.add(0.1 + 0.8 * (i % 50) / 50.0, 1 + i % 12, 0.1 + 0.8 * (i % 50) / 50.0);
  c.finalize();
  auto d = c.dress(0.42, 3, {0.1, 0.5, 0.9});
  for (double v : d.quantiles.values()) EXPECT_NEAR(v, 0.42, 1e-15);
}

TEST(Dressing, SymmetricBinMedianIsPoint) {
  ErrorClimatology c(6, 10);
  for (int i = 0; i < 410; ++i) {
    const double e = 0.001 * (i % 41 - 20);
    c.add(0.5, 2, 0.5 + e);
  }
  c.finalize();
  auto d = c.dress(0.5, 2, {0.25, 0.5, 0.75});
  EXPECT_FALSE(d.fallback);
  EXPECT_NEAR(d.quantiles.values()[1], 0.5, 1e-12);
  EXPECT_NEAR(d.quantiles.values()[0] + d.quantiles.values()[2], 1.0, 1e-12);
}

TEST(Dressing, SparseBinFallsBackToLeadBucket) {
  ErrorClimatology c(6, 200);
  for (int i = 0; i < 300; ++i) c.add(0.9, 1, 0.85);
  for (int i = 0; i < 5; ++i) c.add(0.1, 1, 0.2);
  c.finalize();
  EXPECT_EQ(c.count(ErrorClimatology::level_bin(0.1), 0), 5u);
  auto d = c.dress(0.1, 1, {0.25, 0.5});
  EXPECT_TRUE(d.fallback);
  EXPECT_NEAR(d.quantiles.values()[1], 0.05, 1e-12);
  EXPECT_EQ(ErrorClimatology::lead_bucket(6), 0);
  EXPECT_EQ(ErrorClimatology::lead_bucket(7), 1);
  EXPECT_EQ(ErrorClimatology::level_bin(1.0), 4);
}

TEST(Dressing, TypeSevenQuantile) {
  std::vector<double> s = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(empirical_quantile(s, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(empirical_quantile(s, 1.0 / 3.0), 2.0);
}

TEST(VarianceTracker, ExponentialSmoothingAndFloor) {
  VarianceTracker v(2, 0.9, 0.01);
  v.update(0, 0.2);
  EXPECT_NEAR(v.variance(0), 0.9 * 0.01 + 0.1 * 0.04, 1e-15);
  EXPECT_EQ(v.variance(1), 0.01);
  VarianceTracker tiny(1, 0.5, 1e-9);
  tiny.update(0, 0.0);
  EXPECT_EQ(tiny.variance(0), VarianceTracker::kFloor);
  VarianceTracker frozen(1, 1.0, 0.02);
  frozen.update(0, 5.0);
  EXPECT_EQ(frozen.variance(0), 0.02);
  EXPECT_THROW(VarianceTracker(1, 0.0, 0.01), std::invalid_argument);
}

TEST(ForecastIo, QuantileAndParametricRoundTrip) {
  const auto t0 = parse_utc("2007-01-01T12:00:00Z");
  std::vector<MarginalForecast> q = {
      {t0, "a", 1, QuantileSet({0.1, 0.5, 0.9}, {0.1, 0.3, 1.0 / 3.0})},
      {t0, "a", 2, QuantileSet({0.1, 0.5, 0.9}, {0.0, 0.0, 0.2})},
  };
  std::stringstream buf;
  write_quantile_forecasts(buf, q);
  auto back = read_quantile_forecasts(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(std::get<QuantileSet>(back[0].cdf).values(), std::get<QuantileSet>(q[0].cdf).values());
  EXPECT_EQ(back[1].lead, 2);

  std::vector<MarginalForecast> p = {
      {t0, "b", 1, ParametricDensity::censored_gaussian(0.3, 0.1)},
      {t0, "b", 2, ParametricDensity::generalized_logit_normal(0.1, 0.5, 2.0)},
      {t0, "b", 3, ParametricDensity::beta(2.0, 3.5)},
  };
  std::stringstream pbuf;
  write_parametric_forecasts(pbuf, p);
  auto pback = read_parametric_forecasts(pbuf);
  ASSERT_EQ(pback.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (double y : {0.0, 0.2, 0.5, 0.9}) EXPECT_EQ(cdf_eval(pback[i].cdf, y), cdf_eval(p[i].cdf, y));

  std::istringstream bad("origin,site,lead_h,alpha,quantile\n2007-01-01T12:00:00Z,a,1,1.5,0.2\n");
  EXPECT_THROW(read_quantile_forecasts(bad), DataError);
}
