#pragma once

#include <random>
#include <span>
#include <string_view>

namespace windcast::prob {

enum class Family { TruncatedGaussian, CensoredGaussian, GeneralizedLogitNormal, Beta };

std::string_view family_name(Family family);
/// Accepts "truncated-gaussian", "censored-gaussian", "generalized-logit-normal", "beta".
Family parse_family(std::string_view name);

/// Predictive density on [0,1] from a two- or three-parameter family.
///
/// Censored Gaussian and generalized logit-normal carry explicit point masses
/// at 0 and 1. The logit-normal uses x = log(y^nu / (1 - y^nu)) ~ N(mu, sigma^2)
/// and censors values within `boundary` of either bound onto the bound.
class ParametricDensity {
 public:
  static ParametricDensity truncated_gaussian(double mu, double sigma);
  static ParametricDensity censored_gaussian(double mu, double sigma);
  static ParametricDensity generalized_logit_normal(double mu, double sigma, double nu,
                                                    double boundary = 1e-3);
  static ParametricDensity beta(double a, double b);
  /// Throws std::invalid_argument when variance >= mean (1 - mean).
  static ParametricDensity beta_from_moments(double mean, double variance);

  Family family() const { return family_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double nu() const { return nu_; }
  double boundary() const { return boundary_; }
  /// Beta shape parameters (only meaningful for Family::Beta).
  double a() const { return mu_; }
  double b() const { return sigma_; }

  /// P(Y <= y).
  double cdf(double y) const;
  /// P(Y < y).
  double cdf_left(double y) const;
  /// Density of the continuous part on (0,1).
  double density(double y) const;
  double mass_at_zero() const;
  double mass_at_one() const;
  double mean() const;
  double variance() const;
  /// E[Y 1{Y <= x}]; closed form except for the logit-normal (adaptive quadrature).
  double partial_mean(double x) const;
  /// Closed-form quantile (generalized inverse of cdf).
  double quantile(double alpha) const;

  template <class Rng>
  double sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double p = u(rng);
    while (p <= 0.0) p = u(rng);
    return quantile(p);
  }

 private:
  ParametricDensity(Family family, double mu, double sigma, double nu, double boundary);

  // Generalized logit-normal transform and its inverse.
  double to_latent(double y) const;
  double from_latent(double x) const;
  // E[Y] restricted to latent values in [za, zb] (standardized), logit-normal only.
  double latent_interior_mean(double za, double zb) const;

  Family family_;
  double mu_;
  double sigma_;
  double nu_;
  double boundary_;
};

/// Builds the family from a point forecast and a variance so that the mean of
/// the density equals `point` (within 1e-4; points are pulled 1e-6 inside the
/// open interval for families without boundary mass). `sigma` is sqrt(variance)
/// for the Gaussian families; for the logit-normal the variance is carried to
/// the latent scale by the delta method; Beta uses exact moments.
ParametricDensity make_parametric(double point, double variance, Family family, double nu = 1.0);

/// Profile-likelihood choice of the logit-normal shape over `grid`,
/// using interior observations only.
double estimate_gln_shape(std::span<const double> observations,
                          std::span<const double> grid = {}, double boundary = 1e-3);

}  // namespace windcast::prob
