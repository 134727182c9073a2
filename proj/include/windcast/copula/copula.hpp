#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windcast/core/series.hpp"
#include "windcast/prob/predictive_cdf.hpp"

namespace windcast::copula {

/// One predictive CDF per cell of a MultivariateTarget, site-major.
using Marginals = std::vector<prob::PredictiveCDF>;

inline constexpr double kProbabilityClamp = 1e-9;

struct LatentSample {
  TimePoint origin;
  Eigen::VectorXd z;
};

/// z = Phi^{-1}(F(y)) per cell, probabilities clamped to [1e-9, 1 - 1e-9].
LatentSample to_latent(std::span<const double> y, const Marginals& marginals, TimePoint origin = {});

/// Correlation matrix of the latent Gaussian field with exponential smoothing.
class LatentCovariance {
 public:
  LatentCovariance(Eigen::MatrixXd correlation, double smoothing = 0.98);
  static LatentCovariance identity(std::size_t dim, double smoothing = 0.98);

  std::size_t dim() const { return static_cast<std::size_t>(c_.rows()); }
  const Eigen::MatrixXd& matrix() const { return c_; }
  double smoothing() const { return smoothing_; }

  /// lambda C + (1 - lambda) z z^T before renormalization.
  Eigen::MatrixXd smoothed(const Eigen::VectorXd& z) const;
  /// Smoothing step followed by rescaling to unit diagonal.
  void update(const LatentSample& sample);

  /// Lower Cholesky factor, adding diagonal jitter 0, 1e-12, ..., 1e-8 until
  /// the factorization succeeds. Throws NumericError beyond that.
  Eigen::MatrixXd cholesky() const;
  double last_jitter() const { return jitter_; }

 private:
  Eigen::MatrixXd c_;
  double smoothing_;
  mutable double jitter_ = 0.0;
};

LatentCovariance update_covariance(const LatentCovariance& cov, const LatentSample& sample);

/// J joint sample paths over m sites x n leads, each stored site-major.
struct TrajectorySet {
  TimePoint origin;
  std::vector<std::string> sites;
  int leads = 0;
  std::vector<std::vector<double>> paths;

  std::size_t size() const { return paths.size(); }
  double value(std::size_t j, std::size_t site, int lead) const {
    return paths[j][site * static_cast<std::size_t>(leads) + static_cast<std::size_t>(lead - 1)];
  }
};

/// Phi(z) clamped to [1e-16, 1 - 1e-16] so the marginal inverse is defined.
double latent_level(double z);

/// Latent draws z^(j) = L e^(j) with e^(j) from the stream (seed, j).
std::vector<Eigen::VectorXd> sample_latent(const LatentCovariance& cov, int count, std::uint64_t seed);

/// y^(j) = F^{-1}(Phi(z^(j))) cell by cell.
TrajectorySet sample_trajectories(const MultivariateTarget& target, const Marginals& marginals,
                                  const LatentCovariance& cov, int count, std::uint64_t seed);

struct JointProbability {
  double estimate;
  double standard_error;
};

/// Monte Carlo estimate of P(Y <= y) under the Gaussian copula.
JointProbability joint_cdf(std::span<const double> y, const Marginals& marginals,
                           const LatentCovariance& cov, std::uint64_t seed, int draws = 100000);

/// `origin,traj_id,site,lead_h,value`.
void write_trajectories(std::ostream& out, const std::vector<TrajectorySet>& sets);
void write_trajectories(const std::filesystem::path& path, const std::vector<TrajectorySet>& sets);
std::vector<TrajectorySet> read_trajectories(std::istream& in);
std::vector<TrajectorySet> read_trajectories(const std::filesystem::path& path);

/// Plain-text checkpoint: "dim N", "smoothing lambda", then N rows.
void write_covariance(std::ostream& out, const LatentCovariance& cov);
void write_covariance(const std::filesystem::path& path, const LatentCovariance& cov);
LatentCovariance read_covariance(std::istream& in);
LatentCovariance read_covariance(const std::filesystem::path& path);

}  // namespace windcast::copula
