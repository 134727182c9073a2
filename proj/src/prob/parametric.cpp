#include "windcast/prob/parametric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "windcast/prob/normal.hpp"

namespace windcast::prob {

namespace {

constexpr double kPointEps = 1e-6;

// Upper-tail Mills ratio Q(x) / phi(x) for x >= 0.
double mills_ratio(double x) {
  if (x < 5.0) return 0.5 * std::erfc(x / std::numbers::sqrt2) / normal_pdf(x);
  // Continued fraction 1 / (x + 1 / (x + 2 / (x + 3 / ...))).
  double tail = x;
  for (int k = 80; k >= 1; --k) tail = x + k / tail;
  return 1.0 / tail;
}

double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// First two raw moments of a standard normal truncated to [a, b].
struct TruncMoments {
  double m1;
  double m2;
};

TruncMoments truncated_standard_moments(double a, double b) {
  if (a >= 0.0) {
    const double e = std::exp(0.5 * (a * a - b * b));
    const double denom = mills_ratio(a) - mills_ratio(b) * e;
    const double bterm = std::isfinite(b) ? b * e : 0.0;
    return {(1.0 - e) / denom, 1.0 + (a - bterm) / denom};
  }
  if (b <= 0.0) {
    auto r = truncated_standard_moments(-b, -a);
    return {-r.m1, r.m2};
  }
  const double z = normal_cdf(b) - normal_cdf(a);
  const double pa = normal_pdf(a), pb = normal_pdf(b);
  const double apa = std::isfinite(a) ? a * pa : 0.0;
  const double bpb = std::isfinite(b) ? b * pb : 0.0;
  return {(pa - pb) / z, 1.0 + (apa - bpb) / z};
}

// P(a <= X <= z) / P(a <= X <= b) for standard normal X.
double truncated_standard_cdf(double a, double b, double z) {
  if (z <= a) return 0.0;
  if (z >= b) return 1.0;
  if (a >= 0.0) {
    // Ratios of upper tails relative to Q(a), computed without underflow.
    auto rel = [&](double x) { return mills_ratio(x) / mills_ratio(a) * std::exp(0.5 * (a * a - x * x)); };
    return (1.0 - rel(z)) / (1.0 - rel(b));
  }
  if (b <= 0.0) return 1.0 - truncated_standard_cdf(-b, -a, -z);
  return (normal_cdf(z) - normal_cdf(a)) / (normal_cdf(b) - normal_cdf(a));
}

// Composite Simpson over [lo, hi] with `intervals` (even) panels.
template <class F>
double simpson(F&& f, double lo, double hi, int intervals) {
  if (!(hi > lo)) return 0.0;
  const double h = (hi - lo) / intervals;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

template <class MeanFn>
double solve_location(MeanFn&& mean_of, double target, double start) {
  double lo = start - 1.0, hi = start + 1.0;
  for (int i = 0; i < 200 && mean_of(lo) > target; ++i) lo -= (hi - lo);
  for (int i = 0; i < 200 && mean_of(hi) < target; ++i) hi += (hi - lo);
  for (int i = 0; i < 300; ++i) {
    double mid = 0.5 * (lo + hi);
    double m = mean_of(mid);
    if (std::abs(m - target) < 1e-10) return mid;
    (m < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::TruncatedGaussian: return "truncated-gaussian";
    case Family::CensoredGaussian: return "censored-gaussian";
    case Family::GeneralizedLogitNormal: return "generalized-logit-normal";
    case Family::Beta: return "beta";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (auto f : {Family::TruncatedGaussian, Family::CensoredGaussian,
                 Family::GeneralizedLogitNormal, Family::Beta})
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown density family '" + std::string(name) + "'");
}

ParametricDensity::ParametricDensity(Family family, double mu, double sigma, double nu,
                                     double boundary)
    : family_(family), mu_(mu), sigma_(sigma), nu_(nu), boundary_(boundary) {
  if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("density needs finite location and positive scale");
  if (!(nu > 0.0)) throw std::invalid_argument("shape nu must be positive");
  if (family == Family::Beta && !(mu > 0.0))
    throw std::invalid_argument("Beta shape parameters must be positive");
  if (family == Family::GeneralizedLogitNormal && !(boundary > 0.0 && boundary < 0.5))
    throw std::invalid_argument("logit-normal boundary must lie in (0, 0.5)");
}

ParametricDensity ParametricDensity::truncated_gaussian(double mu, double sigma) {
  return {Family::TruncatedGaussian, mu, sigma, 1.0, 0.0};
}

ParametricDensity ParametricDensity::censored_gaussian(double mu, double sigma) {
  return {Family::CensoredGaussian, mu, sigma, 1.0, 0.0};
}

ParametricDensity ParametricDensity::generalized_logit_normal(double mu, double sigma, double nu,
                                                              double boundary) {
  return {Family::GeneralizedLogitNormal, mu, sigma, nu, boundary};
}

ParametricDensity ParametricDensity::beta(double a, double b) {
  return {Family::Beta, a, b, 1.0, 0.0};
}

ParametricDensity ParametricDensity::beta_from_moments(double mean, double variance) {
  if (!(mean > 0.0 && mean < 1.0)) throw std::invalid_argument("Beta mean must lie in (0,1)");
  if (!(variance > 0.0) || variance >= mean * (1.0 - mean))
    throw std::invalid_argument("variance infeasible for a Beta density on [0,1]");
  const double common = mean * (1.0 - mean) / variance - 1.0;
  return beta(mean * common, (1.0 - mean) * common);
}

double ParametricDensity::to_latent(double y) const {
  const double p = std::pow(y, nu_);
  return std::log(p / (1.0 - p));
}

double ParametricDensity::from_latent(double x) const {
  return std::pow(1.0 / (1.0 + std::exp(-x)), 1.0 / nu_);
}

double ParametricDensity::mass_at_zero() const {
  switch (family_) {
    case Family::CensoredGaussian: return normal_cdf(-mu_ / sigma_);
    case Family::GeneralizedLogitNormal: return normal_cdf((to_latent(boundary_) - mu_) / sigma_);
    default: return 0.0;
  }
}

double ParametricDensity::mass_at_one() const {
  switch (family_) {
    case Family::CensoredGaussian: return upper_tail((1.0 - mu_) / sigma_);
    case Family::GeneralizedLogitNormal:
      return upper_tail((to_latent(1.0 - boundary_) - mu_) / sigma_);
    default: return 0.0;
  }
}

double ParametricDensity::cdf(double y) const {
  if (y < 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  switch (family_) {
    case Family::TruncatedGaussian:
      return truncated_standard_cdf(-mu_ / sigma_, (1.0 - mu_) / sigma_, (y - mu_) / sigma_);
    case Family::CensoredGaussian: return normal_cdf((y - mu_) / sigma_);
    case Family::GeneralizedLogitNormal: {
      const double clamped = std::clamp(y, boundary_, 1.0 - boundary_);
      if (y < boundary_) return mass_at_zero();
      return normal_cdf((to_latent(clamped) - mu_) / sigma_);
    }
    case Family::Beta:
      return boost::math::cdf(boost::math::beta_distribution<double>(mu_, sigma_), y);
  }
  return 0.0;
}

double ParametricDensity::cdf_left(double y) const {
  if (y <= 0.0) return 0.0;
  if (y > 1.0) return 1.0;
  if (y == 1.0) return 1.0 - mass_at_one();
  // Only the boundary atoms create jumps; the interior is continuous.
  return cdf(y);
}

double ParametricDensity::density(double y) const {
  if (y <= 0.0 || y >= 1.0) return 0.0;
  switch (family_) {
    case Family::TruncatedGaussian: {
      const double a = -mu_ / sigma_, b = (1.0 - mu_) / sigma_, z = (y - mu_) / sigma_;
      // phi(z) / (sigma * Z), stable in both tails.
      if (a >= 0.0)
        return std::exp(0.5 * (a * a - z * z)) /
               (sigma_ * (mills_ratio(a) - mills_ratio(b) * std::exp(0.5 * (a * a - b * b))));
      if (b <= 0.0)
        return std::exp(0.5 * (b * b - z * z)) /
               (sigma_ * (mills_ratio(-b) - mills_ratio(-a) * std::exp(0.5 * (b * b - a * a))));
      return normal_pdf(z) / (sigma_ * (normal_cdf(b) - normal_cdf(a)));
    }
    case Family::CensoredGaussian: return normal_pdf((y - mu_) / sigma_) / sigma_;
    case Family::GeneralizedLogitNormal: {
      if (y < boundary_ || y > 1.0 - boundary_) return 0.0;
      const double jac = nu_ / (y * (1.0 - std::pow(y, nu_)));
      return normal_pdf((to_latent(y) - mu_) / sigma_) / sigma_ * jac;
    }
    case Family::Beta:
      return boost::math::pdf(boost::math::beta_distribution<double>(mu_, sigma_), y);
  }
  return 0.0;
}

double ParametricDensity::latent_interior_mean(double za, double zb) const {
  za = std::max(za, -12.0);
  zb = std::min(zb, 12.0);
  if (!(zb > za)) return 0.0;
  auto f = [&](double z) { return from_latent(mu_ + sigma_ * z) * normal_pdf(z); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, za, zb, 15, 1e-12);
}

double ParametricDensity::mean() const {
  switch (family_) {
    case Family::TruncatedGaussian: {
      auto m = truncated_standard_moments(-mu_ / sigma_, (1.0 - mu_) / sigma_);
      return std::clamp(mu_ + sigma_ * m.m1, 0.0, 1.0);
    }
    case Family::CensoredGaussian: {
      const double a = -mu_ / sigma_, b = (1.0 - mu_) / sigma_;
      return mu_ * (normal_cdf(b) - normal_cdf(a)) + sigma_ * (normal_pdf(a) - normal_pdf(b)) +
             upper_tail(b);
    }
    case Family::GeneralizedLogitNormal:
      return mass_at_one() + latent_interior_mean((to_latent(boundary_) - mu_) / sigma_,
                                                  (to_latent(1.0 - boundary_) - mu_) / sigma_);
    case Family::Beta: return mu_ / (mu_ + sigma_);
  }
  return 0.0;
}

double ParametricDensity::variance() const {
  switch (family_) {
    case Family::TruncatedGaussian: {
      auto m = truncated_standard_moments(-mu_ / sigma_, (1.0 - mu_) / sigma_);
      return std::max(sigma_ * sigma_ * (m.m2 - m.m1 * m.m1), 0.0);
    }
    case Family::CensoredGaussian: {
      const double a = -mu_ / sigma_, b = (1.0 - mu_) / sigma_;
      const double inner = normal_cdf(b) - normal_cdf(a);
      // E[Y^2] = E[X^2; 0<X<1] + P(X>=1).
      const double apa = a * normal_pdf(a), bpb = b * normal_pdf(b);
      const double ex2 = (mu_ * mu_ + sigma_ * sigma_) * inner +
                         2.0 * mu_ * sigma_ * (normal_pdf(a) - normal_pdf(b)) +
                         sigma_ * sigma_ * (apa - bpb) + upper_tail(b);
      const double m = mean();
      return std::max(ex2 - m * m, 0.0);
    }
    case Family::GeneralizedLogitNormal: {
      const double za = std::max((to_latent(boundary_) - mu_) / sigma_, -10.0);
      const double zb = std::min((to_latent(1.0 - boundary_) - mu_) / sigma_, 10.0);
      const double ex2 =
          mass_at_one() + simpson(
                              [&](double z) {
                                double y = from_latent(mu_ + sigma_ * z);
                                return y * y * normal_pdf(z);
                              },
                              za, zb, 4000);
      const double m = mean();
      return std::max(ex2 - m * m, 0.0);
    }
    case Family::Beta: {
      const double s = mu_ + sigma_;
      return mu_ * sigma_ / (s * s * (s + 1.0));
    }
  }
  return 0.0;
}

double ParametricDensity::partial_mean(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return mean();
  switch (family_) {
    case Family::TruncatedGaussian: {
      const double a = -mu_ / sigma_, z = (x - mu_) / sigma_;
      const double f = cdf(x);
      if (f <= 0.0) return 0.0;
      return f * std::clamp(mu_ + sigma_ * truncated_standard_moments(a, z).m1, 0.0, x);
    }
    case Family::CensoredGaussian: {
      const double a = -mu_ / sigma_, z = (x - mu_) / sigma_;
      const double inside = z <= 0.0 ? normal_cdf(z) - normal_cdf(a) : upper_tail(a) - upper_tail(z);
      return std::max(mu_ * inside + sigma_ * (normal_pdf(a) - normal_pdf(z)), 0.0);
    }
    case Family::GeneralizedLogitNormal: {
      if (x < boundary_) return 0.0;
      const double za = (to_latent(boundary_) - mu_) / sigma_;
      const double zx = (to_latent(std::min(x, 1.0 - boundary_)) - mu_) / sigma_;
      return latent_interior_mean(za, zx);
    }
    case Family::Beta: return mu_ / (mu_ + sigma_) * boost::math::ibeta(mu_ + 1.0, sigma_, x);
  }
  return 0.0;
}

double ParametricDensity::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
  switch (family_) {
    case Family::TruncatedGaussian: {
      const double a = -mu_ / sigma_, b = (1.0 - mu_) / sigma_;
      const double pa = normal_cdf(a), pb = normal_cdf(b);
      if (pb - pa > 1e-10) {
        double z = normal_quantile(pa + alpha * (pb - pa));
        return std::clamp(mu_ + sigma_ * z, 0.0, 1.0);
      }
      double lo = 0.0, hi = 1.0;
      while (hi - lo > 1e-13) {
        double mid = 0.5 * (lo + hi);
        (cdf(mid) >= alpha ? hi : lo) = mid;
      }
      return hi;
    }
    case Family::CensoredGaussian: {
      if (alpha <= mass_at_zero()) return 0.0;
      if (alpha > 1.0 - mass_at_one()) return 1.0;
      return std::clamp(mu_ + sigma_ * normal_quantile(alpha), 0.0, 1.0);
    }
    case Family::GeneralizedLogitNormal: {
      if (alpha <= mass_at_zero()) return 0.0;
      if (alpha > 1.0 - mass_at_one()) return 1.0;
      return std::clamp(from_latent(mu_ + sigma_ * normal_quantile(alpha)), boundary_,
                        1.0 - boundary_);
    }
    case Family::Beta: {
      // Far tails can exhaust the root finder; its last iterate is accurate enough there.
      using Lenient = boost::math::policies::policy<
          boost::math::policies::evaluation_error<boost::math::policies::ignore_error>>;
      return std::clamp(boost::math::ibeta_inv(mu_, sigma_, alpha, Lenient()), 0.0, 1.0);
    }
  }
  return 0.0;
}

ParametricDensity make_parametric(double point, double variance, Family family, double nu) {
  if (!(point >= 0.0 && point <= 1.0)) throw std::invalid_argument("point forecast outside [0,1]");
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
  const double target = std::clamp(point, kPointEps, 1.0 - kPointEps);
  const double sd = std::sqrt(variance);

  switch (family) {
    case Family::TruncatedGaussian: {
      double mu = solve_location(
          [&](double m) { return ParametricDensity::truncated_gaussian(m, sd).mean(); }, target,
          target);
      return ParametricDensity::truncated_gaussian(mu, sd);
    }
    case Family::CensoredGaussian: {
      double mu = solve_location(
          [&](double m) { return ParametricDensity::censored_gaussian(m, sd).mean(); }, target,
          target);
      return ParametricDensity::censored_gaussian(mu, sd);
    }
    case Family::GeneralizedLogitNormal: {
      const double p = std::pow(target, nu);
      const double jac = nu / (target * (1.0 - p));
      const double latent_sd = std::clamp(sd * jac, 1e-3, 10.0);
      const double start = std::log(p / (1.0 - p));
      double mu = solve_location(
          [&](double m) {
            return ParametricDensity::generalized_logit_normal(m, latent_sd, nu).mean();
          },
          target, start);
      return ParametricDensity::generalized_logit_normal(mu, latent_sd, nu);
    }
    case Family::Beta: return ParametricDensity::beta_from_moments(target, variance);
  }
  throw std::invalid_argument("unknown family");
}

double estimate_gln_shape(std::span<const double> observations, std::span<const double> grid,
                          double boundary) {
  static constexpr std::array<double, 4> kDefaultGrid{0.5, 1.0, 2.0, 3.0};
  if (grid.empty()) grid = kDefaultGrid;
  double best_nu = grid.front();
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double nu : grid) {
    std::vector<double> x;
    double log_jac = 0.0;
    for (double y : observations) {
      if (!(y > boundary && y < 1.0 - boundary)) continue;
      const double p = std::pow(y, nu);
      x.push_back(std::log(p / (1.0 - p)));
      log_jac += std::log(nu / (y * (1.0 - p)));
    }
    if (x.size() < 2) throw std::invalid_argument("too few interior observations for shape fit");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    if (!(var > 0.0)) continue;
    const double n = static_cast<double>(x.size());
    const double ll = -0.5 * n * (std::log(2.0 * std::numbers::pi * var) + 1.0) + log_jac;
    if (ll > best_ll) {
      best_ll = ll;
      best_nu = nu;
    }
  }
  return best_nu;
}

}  // namespace windcast::prob
