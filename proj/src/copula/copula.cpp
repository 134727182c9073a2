#include "windcast/copula/copula.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "windcast/core/error.hpp"
#include "windcast/core/random.hpp"
#include "windcast/prob/normal.hpp"

namespace windcast::copula {

namespace {

double latent_of(double p) {
  return prob::normal_quantile(std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp));
}

void check_dims(std::size_t y, std::size_t marginals, std::size_t cov) {
  if (y != marginals) throw std::invalid_argument("observation and marginal dimensions differ");
  if (cov != 0 && cov != marginals)
    throw std::invalid_argument("covariance dimension does not match the marginals");
}

}  // namespace

double latent_level(double z) { return std::clamp(prob::normal_cdf(z), 1e-16, 1.0 - 1e-16); }

LatentSample to_latent(std::span<const double> y, const Marginals& marginals, TimePoint origin) {
  check_dims(y.size(), marginals.size(), 0);
  LatentSample s{origin, Eigen::VectorXd(static_cast<Eigen::Index>(y.size()))};
  for (std::size_t i = 0; i < y.size(); ++i)
    s.z(static_cast<Eigen::Index>(i)) = latent_of(prob::cdf_eval(marginals[i], y[i]));
  return s;
}

LatentCovariance::LatentCovariance(Eigen::MatrixXd correlation, double smoothing)
    : c_(std::move(correlation)), smoothing_(smoothing) {
  if (!(smoothing > 0.0 && smoothing <= 1.0))
    throw std::invalid_argument("covariance smoothing must lie in (0,1]");
  if (c_.rows() == 0 || c_.rows() != c_.cols())
    throw std::invalid_argument("correlation matrix must be square and nonempty");
  for (Eigen::Index i = 0; i < c_.rows(); ++i) {
    if (std::abs(c_(i, i) - 1.0) > 1e-10)
      throw std::invalid_argument("correlation matrix needs a unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(c_(i, j) - c_(j, i)) > 1e-12)
        throw std::invalid_argument("correlation matrix must be symmetric");
  }
}

LatentCovariance LatentCovariance::identity(std::size_t dim, double smoothing) {
  const auto n = static_cast<Eigen::Index>(dim);
  return LatentCovariance(Eigen::MatrixXd::Identity(n, n), smoothing);
}

Eigen::MatrixXd LatentCovariance::smoothed(const Eigen::VectorXd& z) const {
  if (z.size() != c_.rows()) throw std::invalid_argument("latent sample dimension mismatch");
  if (!z.allFinite()) throw std::invalid_argument("latent sample has non-finite entries");
  return smoothing_ * c_ + (1.0 - smoothing_) * z * z.transpose();
}

void LatentCovariance::update(const LatentSample& sample) {
  Eigen::MatrixXd s = smoothed(sample.z);
  const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
  s = d.asDiagonal() * s * d.asDiagonal();
  s.diagonal().setOnes();
  c_ = 0.5 * (s + s.transpose());
}

Eigen::MatrixXd LatentCovariance::cholesky() const {
  const auto n = c_.rows();
  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd a = c_;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      jitter_ = jitter;
      return llt.matrixL();
    }
    jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
    if (jitter > 1e-8 * (1.0 + 1e-9))
      throw NumericError(fmt::format("latent correlation ({}x{}) not positive semi-definite", n, n));
  }
}

LatentCovariance update_covariance(const LatentCovariance& cov, const LatentSample& sample) {
  LatentCovariance next = cov;
  next.update(sample);
  return next;
}

std::vector<Eigen::VectorXd> sample_latent(const LatentCovariance& cov, int count,
                                           std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("need at least one trajectory");
  const Eigen::MatrixXd l = cov.cholesky();
  const auto n = l.rows();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    auto rng = make_stream({seed, static_cast<std::uint64_t>(j)});
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = normal(rng);
    out.push_back(l.triangularView<Eigen::Lower>() * e);
  }
  return out;
}

TrajectorySet sample_trajectories(const MultivariateTarget& target, const Marginals& marginals,
                                  const LatentCovariance& cov, int count, std::uint64_t seed) {
  check_dims(target.dim(), marginals.size(), cov.dim());
  TrajectorySet set;
  set.origin = target.leads().origin();
  set.sites = target.sites().ids();
  set.leads = target.num_leads();
  for (const auto& z : sample_latent(cov, count, seed)) {
    std::vector<double> path(marginals.size());
    for (std::size_t i = 0; i < path.size(); ++i)
      path[i] = std::clamp(prob::cdf_inverse(marginals[i], latent_level(z(static_cast<Eigen::Index>(i)))),
                           0.0, 1.0);
    set.paths.push_back(std::move(path));
  }
  return set;
}

JointProbability joint_cdf(std::span<const double> y, const Marginals& marginals,
                           const LatentCovariance& cov, std::uint64_t seed, int draws) {
  check_dims(y.size(), marginals.size(), cov.dim());
  if (draws < 2) throw std::invalid_argument("joint CDF needs at least two draws");
  const Eigen::VectorXd u = to_latent(y, marginals).z;
  std::size_t hits = 0;
  for (const auto& z : sample_latent(cov, draws, seed))
    if ((z.array() <= u.array()).all()) ++hits;
  const double p = static_cast<double>(hits) / draws;
  return {p, std::sqrt(p * (1.0 - p) / draws)};
}

}  // namespace windcast::copula
