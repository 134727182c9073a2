#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "windcast/core/error.hpp"
#include "windcast/sim/power_curve.hpp"
#include "windcast/sim/simulator.hpp"

using namespace windcast;
using namespace windcast::sim;

namespace {

SimConfig base_config(std::size_t m) {
  SimConfig c;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < m; ++i) ids.push_back("s" + std::to_string(i));
  c.sites = SiteSet(ids, std::vector<double>(m, 100.0));
  c.ar_coefficient.assign(m, 0.95);
  c.mean_speed.assign(m, 9.0);
  c.spatial_correlation = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  c.speed_sd = 1.0;
  c.start = parse_utc("2007-01-01T00:00:00Z");
  c.seed = 17;
  return c;
}

double lag1_autocorrelation(const Eigen::VectorXd& x) {
  const double mean = x.mean();
  double num = 0, den = 0;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    den += (x(t) - mean) * (x(t) - mean);
    if (t > 0) num += (x(t) - mean) * (x(t - 1) - mean);
  }
  return num / den;
}

}  // namespace

TEST(PowerCurve, ReferenceTurbineRegions) {
  PowerCurveSpec spec;  // cut-in 4, rated 16, cut-off 25
  EXPECT_EQ(power_curve(3.0, spec), 0.0);
  EXPECT_EQ(power_curve(20.0, spec), 1.0);
  EXPECT_EQ(power_curve(25.0, spec), 0.0);
  EXPECT_EQ(power_curve(16.0, spec), 1.0);
  EXPECT_EQ(power_curve(4.0, spec), 0.0);
  EXPECT_NEAR(power_curve(10.0, spec), std::pow(6.0 / 12.0, 3.0), 1e-15);
  EXPECT_THROW(power_curve(-1.0, spec), std::invalid_argument);
}

TEST(PowerCurve, RejectsInconsistentSpeeds) {
  PowerCurveSpec spec;
  spec.rated = 30;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(PowerCurve, MonotoneBelowCutOffAndBounded) {
  PowerCurveSpec spec;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  std::vector<double> v(5000);
  for (double& x : v) x = u(rng);
  std::sort(v.begin(), v.end());
  double previous = 0.0;
  for (double x : v) {
    const double p = power_curve(x, spec);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    if (x < spec.cut_in || x >= spec.cut_off) {
      EXPECT_EQ(p, 0.0);
    }
    if (x < spec.cut_off) {
      EXPECT_GE(p, previous);
      previous = p;
    }
  }
}

TEST(Simulate, DegenerateNoiseGivesConstantSpeed) {
  auto c = base_config(2);
  c.speed_sd = 0.0;
  c.diurnal_amplitude = 0.0;
  auto r = simulate(c, 200);
  for (Eigen::Index t = 0; t < 200; ++t)
    for (Eigen::Index s = 0; s < 2; ++s) {
      EXPECT_EQ(r.speed(t, s), 9.0);
      EXPECT_EQ(r.power.value(static_cast<std::size_t>(t), static_cast<std::size_t>(s)),
                power_curve(9.0, c.curve));
    }
}

TEST(Simulate, IdentityCorrelationGivesUncorrelatedAnomalies) {
  auto c = base_config(2);
  auto r = simulate(c, 100000);
  // Innovations recovered from the AR(1) recursion.
  const Eigen::Index n = r.anomaly.rows();
  Eigen::VectorXd e0 = r.anomaly.col(0).tail(n - 1) - 0.95 * r.anomaly.col(0).head(n - 1);
  Eigen::VectorXd e1 = r.anomaly.col(1).tail(n - 1) - 0.95 * r.anomaly.col(1).head(n - 1);
  const double c01 = ((e0.array() - e0.mean()) * (e1.array() - e1.mean())).mean();
  const double rho = c01 / std::sqrt((e0.array() - e0.mean()).square().mean() *
                                     (e1.array() - e1.mean()).square().mean());
  EXPECT_NEAR(rho, 0.0, 0.02);
  // Anomaly levels too.
  Eigen::VectorXd a0 = r.anomaly.col(0), a1 = r.anomaly.col(1);
  const double level_rho = ((a0.array() - a0.mean()) * (a1.array() - a1.mean())).mean() /
                           std::sqrt((a0.array() - a0.mean()).square().mean() *
                                     (a1.array() - a1.mean()).square().mean());
  EXPECT_NEAR(level_rho, 0.0, 0.05);
}

TEST(Simulate, SpatialCorrelationIsImposedOnInnovations) {
  auto c = base_config(2);
  c.spatial_correlation << 1.0, 0.6, 0.6, 1.0;
  auto r = simulate(c, 100000);
  const Eigen::Index n = r.anomaly.rows();
  Eigen::VectorXd e0 = r.anomaly.col(0).tail(n - 1) - 0.95 * r.anomaly.col(0).head(n - 1);
  Eigen::VectorXd e1 = r.anomaly.col(1).tail(n - 1) - 0.95 * r.anomaly.col(1).head(n - 1);
  const double rho = ((e0.array() - e0.mean()) * (e1.array() - e1.mean())).mean() /
                     std::sqrt((e0.array() - e0.mean()).square().mean() *
                               (e1.array() - e1.mean()).square().mean());
  EXPECT_NEAR(rho, 0.6, 0.02);
}

TEST(Simulate, LagOneAutocorrelationMatchesPhi) {
  auto c = base_config(1);
  auto r = simulate(c, 100000);
  EXPECT_NEAR(lag1_autocorrelation(r.anomaly.col(0)), 0.95, 0.02);
}

TEST(Simulate, StationaryVarianceMatchesAr1Value) {
  auto c = base_config(1);
  c.speed_sd = 0.8;
  const double phi = 0.95;
  const std::size_t n = 100000;
  auto r = simulate(c, n);
  const double target = c.speed_sd * c.speed_sd / (1.0 - phi * phi);
  const Eigen::ArrayXd a = r.anomaly.col(0).array();
  const double sample = (a - a.mean()).square().mean();
  // Var of the sample variance of a Gaussian AR(1): 2 s^4 (1 + phi^2) / ((1 - phi^2) N).
  const double se = std::sqrt(2.0 * target * target * (1.0 + phi * phi) / (1.0 - phi * phi) / n);
  EXPECT_NEAR(sample, target, 3.0 * se);
}

TEST(Simulate, PowerBoundedAndZeroOutsideOperatingRange) {
  auto c = base_config(3);
  c.speed_sd = 2.0;
  c.diurnal_amplitude = 2.0;
  c.mean_speed = {5.0, 12.0, 20.0};
  c.power_noise_sd = 0.05;
  auto r = simulate(c, 20000);
  for (std::size_t t = 0; t < 20000; ++t)
    for (std::size_t s = 0; s < 3; ++s) {
      const double p = r.power.value(t, s);
      ASSERT_GE(p, 0.0);
      ASSERT_LE(p, 1.0);
      const double v = r.speed(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s));
      ASSERT_GE(v, 0.0);
      if (v < c.curve.cut_in || v >= c.curve.cut_off) {
        ASSERT_EQ(p, 0.0);
      }
    }
}

TEST(Simulate, DeterministicForSeed) {
  auto c = base_config(3);
  c.regime = RegimeSwitch{};
  c.power_noise_sd = 0.03;
  auto a = simulate(c, 2000);
  auto b = simulate(c, 2000);
  EXPECT_EQ(a.speed, b.speed);
  EXPECT_EQ(a.direction_deg, b.direction_deg);
  for (std::size_t t = 0; t < 2000; ++t)
    for (std::size_t s = 0; s < 3; ++s) ASSERT_EQ(a.power.value(t, s), b.power.value(t, s));
  c.seed = 18;
  EXPECT_NE(simulate(c, 2000).speed, a.speed);
}

TEST(Simulate, RegimeSwitchUsesPreviousSpeed) {
  auto c = base_config(1);
  c.regime = RegimeSwitch{9.0, 0.3, 1.2};
  auto r = simulate(c, 5000);
  for (Eigen::Index t = 1; t < 5000; ++t) EXPECT_EQ(r.regime(t, 0), r.speed(t - 1, 0) < 9.0 ? 0 : 1);
}

TEST(Simulate, RejectsInvalidConfig) {
  auto c = base_config(2);
  c.spatial_correlation << 1.0, 1.5, 1.5, 1.0;
  EXPECT_THROW(simulate(c, 10), NumericError);
  c = base_config(2);
  c.ar_coefficient = {0.95, 1.0};
  EXPECT_THROW(simulate(c, 10), std::invalid_argument);
  c = base_config(2);
  EXPECT_THROW(simulate(c, 0), std::invalid_argument);
}

TEST(SynthesizeNwp, ZeroErrorReproducesTrueSpeed) {
  auto c = base_config(2);
  auto r = simulate(c, 500);
  auto nwp = synthesize_nwp(r, 1, 43, 6, 0.0, 3);
  ASSERT_FALSE(nwp.empty());
  for (const auto& run : nwp.runs()) {
    const auto origin = static_cast<Eigen::Index>(hours_between(c.start, run.origin));
    EXPECT_EQ(origin % 6, 0);
    ASSERT_EQ(run.horizon(), 43);
    for (int k = 1; k <= 43; ++k) EXPECT_NEAR(run.speed(k), r.speed(origin + k, 1), 1e-12);
  }
}

TEST(SynthesizeNwp, ErrorGrowsWithLead) {
  auto c = base_config(1);
  auto r = simulate(c, 20000);
  auto nwp = synthesize_nwp(r, 0, 40, 6, 2.0, 3);
  double early = 0, late = 0;
  for (const auto& run : nwp.runs()) {
    const auto origin = static_cast<Eigen::Index>(hours_between(c.start, run.origin));
    early += std::pow(run.speed(4) - r.speed(origin + 4, 0), 2);
    late += std::pow(run.speed(40) - r.speed(origin + 40, 0), 2);
  }
  const double n = static_cast<double>(nwp.runs().size());
  EXPECT_NEAR(std::sqrt(late / n), 2.0, 0.1);
  EXPECT_NEAR(std::sqrt(early / n), 0.2, 0.02);
}
