#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ridgeopt/errors.hpp"
#include "ridgeopt/linalg.hpp"
#include "ridgeopt/rng.hpp"

namespace ridgeopt {

enum class ProfileKind { Bulk, Spiked, Explicit };

/// Spectral profile of the generative covariance, realized diagonally in the
/// eigenbasis. Bulk and spiked profiles are normalized so the top eigenvalue
/// is 1.
struct CovarianceProfile {
  ProfileKind kind = ProfileKind::Bulk;
  Vector eigenvalues;

  Index dimension() const { return eigenvalues.size(); }
};

struct GenerativeSpec {
  CovarianceProfile covariance;
  Vector theta;
  double epsilon = 0.0;
};

struct ThetaBatch {
  std::vector<Vector> vectors;
};

/// Bulk: the arithmetic progression 1, (d-1)/d, ..., 1/d.
/// Spiked: the feature scales sigma_j track the gaussian density exp(-x^2/2)
/// at d evenly spaced points on [0, 3] (d = 1 uses x = 0), so the covariance
/// eigenvalues are their squares exp(-x^2); max-normalized by construction.
inline CovarianceProfile make_profile(ProfileKind kind, Index d) {
  if (d < 1) throw DimensionError("make_profile: dimension must be >= 1");
  if (kind == ProfileKind::Explicit)
    throw ConfigError("make_profile: explicit profiles need caller-supplied eigenvalues");
  CovarianceProfile profile;
  profile.kind = kind;
  profile.eigenvalues.resize(d);
  for (Index j = 0; j < d; ++j) {
    if (kind == ProfileKind::Bulk) {
      profile.eigenvalues(j) = static_cast<double>(d - j) / static_cast<double>(d);
    } else {
      const double x = d == 1 ? 0.0 : 3.0 * static_cast<double>(j) / static_cast<double>(d - 1);
      profile.eigenvalues(j) = std::exp(-x * x);
    }
  }
  return profile;
}

inline CovarianceProfile make_explicit_profile(const Vector& eigenvalues) {
  if (eigenvalues.size() < 1)
    throw DimensionError("make_explicit_profile: dimension must be >= 1");
  for (Index j = 0; j < eigenvalues.size(); ++j)
    if (!(eigenvalues(j) > 0.0))
      throw ConfigError("make_explicit_profile: eigenvalue " + std::to_string(j + 1) +
                        " is not positive");
  return CovarianceProfile{ProfileKind::Explicit, eigenvalues};
}

/// N(0, Sigma) sample with Sigma diagonal in its eigenbasis; columns are
/// mean-centered before return. Fixed seed gives a bit-identical matrix.
inline Matrix gen_x(Index n, const CovarianceProfile& profile, std::uint64_t seed) {
  if (n < 2) throw DegenerateSampleError("gen_x: need n >= 2");
  const Index d = profile.dimension();
  Rng rng(seed);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = rng.gaussian();
  for (Index j = 0; j < d; ++j) x.col(j) *= std::sqrt(profile.eigenvalues(j));
  return center_columns(x);
}

/// y = X theta + epsilon z with standard gaussian z, mean-centered.
inline Vector gen_y(const Matrix& x, const Vector& theta, double epsilon,
                    std::uint64_t seed) {
  if (x.cols() != theta.size())
    throw DimensionError("gen_y: theta has " + std::to_string(theta.size()) +
                         " entries, x has " + std::to_string(x.cols()) + " columns");
  if (epsilon < 0.0) throw ConfigError("gen_y: epsilon must be nonnegative");
  Rng rng(seed);
  Vector y = x * theta;
  for (Index i = 0; i < y.size(); ++i) y(i) += epsilon * rng.gaussian();
  return center(y);
}

/// Haar-distributed orthogonal matrix: QR of a gaussian matrix with the R
/// diagonal signs folded into Q.
inline Matrix haar_orthogonal(Index d, Rng& rng) {
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

/// m_theta unit vectors taken as the columns of ceil(m_theta / d) Haar-random
/// orthogonal matrices, truncating the last. Vectors within each d-sized
/// group are mutually orthogonal.
inline ThetaBatch sample_theta_batch(Index d, std::size_t m_theta, std::uint64_t seed) {
  if (d < 1) throw DimensionError("sample_theta_batch: dimension must be >= 1");
  if (m_theta < 1) throw ConfigError("sample_theta_batch: m_theta must be >= 1");
  Rng rng(seed);
  ThetaBatch batch;
  batch.vectors.reserve(m_theta);
  while (batch.vectors.size() < m_theta) {
    const Matrix q = haar_orthogonal(d, rng);
    for (Index j = 0; j < d && batch.vectors.size() < m_theta; ++j)
      batch.vectors.emplace_back(q.col(j));
  }
  return batch;
}

}  // namespace ridgeopt
