#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ridgeopt/errors.hpp"

namespace ridgeopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kRankTolerance = 1e-12;
/// Guard margin keeping lambda strictly above -sigma_min^2 (the objective is
/// strictly convex only on that open half-line).
inline constexpr double kLambdaGuardMargin = 1e-9;

/// Thin SVD X = U diag(sigma) V^T. Singular values are nonincreasing and
/// strictly positive; k = singular_values.size().
struct SvdBundle {
  Matrix left_vectors;     // N x k
  Vector singular_values;  // k
  Matrix right_vectors;    // d x k
  Index n_rows = 0;
  Index n_cols = 0;

  Index rank() const { return singular_values.size(); }
  double sigma_max() const { return singular_values(0); }
  double sigma_min() const { return singular_values(rank() - 1); }
  /// Smallest lambda this spectrum can be solved at.
  double min_feasible_lambda() const {
    const double s2 = sigma_min() * sigma_min();
    return -s2 * (1.0 - kLambdaGuardMargin);
  }
};

struct RidgeFit {
  double lambda = 0.0;
  Vector theta_hat;
  double in_sample_residual_ss = 0.0;  // sum over rows of (yhat_i - y_i)^2
};

/// Subtracts the column means. Requires at least two rows.
inline Matrix center_columns(const Matrix& data) {
  if (data.rows() < 2)
    throw DegenerateSampleError("center_columns: need at least 2 rows, got " +
                                std::to_string(data.rows()));
  return data.rowwise() - data.colwise().mean();
}

/// Subtracts the mean from a label vector.
inline Vector center(const Vector& y) {
  if (y.size() < 2)
    throw DegenerateSampleError("center: need at least 2 entries, got " +
                                std::to_string(y.size()));
  return y.array() - y.mean();
}

namespace detail {

inline SvdBundle thin_svd(const Matrix& data, Index keep) {
  if (data.rows() < 1 || data.cols() < 1)
    throw DimensionError("decompose: empty matrix");
  Eigen::BDCSVD<Matrix> svd(data, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& all = svd.singularValues();
  const double smax = all(0);
  if (!(smax > 0.0))
    throw SingularityError("decompose: all singular values are zero");
  if (all(keep - 1) < kRankTolerance * smax)
    throw SingularityError("decompose: numerically rank-deficient, sigma_" +
                           std::to_string(keep) + " / sigma_1 = " +
                           std::to_string(all(keep - 1) / smax));
  SvdBundle out;
  out.left_vectors = svd.matrixU().leftCols(keep);
  out.singular_values = all.head(keep);
  out.right_vectors = svd.matrixV().leftCols(keep);
  out.n_rows = data.rows();
  out.n_cols = data.cols();
  return out;
}

}  // namespace detail

/// Thin SVD with k = min(d, N); errors out on numerical rank deficiency.
inline SvdBundle decompose(const Matrix& data) {
  return detail::thin_svd(data, std::min(data.rows(), data.cols()));
}

/// Thin SVD of a column-centered sample. Centering annihilates the all-ones
/// direction, so a centered N x d matrix has rank at most N - 1; the rank
/// budget here is k = min(d, N - 1) and the structural null mode is dropped
/// when d >= N. It carries no weight in any downstream formula: its singular
/// value is zero and U^T y has no component on it for centered y.
inline SvdBundle decompose_centered(const Matrix& data) {
  if (data.rows() < 2)
    throw DegenerateSampleError("decompose_centered: need at least 2 rows");
  return detail::thin_svd(data, std::min(data.cols(), data.rows() - 1));
}

/// Ridge solution theta_hat = V diag(sigma_j / (sigma_j^2 + lambda)) U^T y.
/// The same expression serves d <= N and d > N. Valid for any lambda with
/// sigma_j^2 + lambda > 0, including negative values above -sigma_min^2.
inline RidgeFit ridge_solve(const SvdBundle& svd, const Vector& y, double lambda) {
  if (y.size() != svd.n_rows)
    throw DimensionError("ridge_solve: y has " + std::to_string(y.size()) +
                         " entries, expected " + std::to_string(svd.n_rows));
  if (!(lambda > svd.min_feasible_lambda()))
    throw NonconvexObjectiveError(
        "ridge_solve: lambda = " + std::to_string(lambda) +
        " <= -sigma_min^2; objective is not strictly convex");

  const Index k = svd.rank();
  const Vector coeffs = svd.left_vectors.transpose() * y;  // U^T y
  Vector gains(k);
  double residual_ss = y.squaredNorm();
  for (Index j = 0; j < k; ++j) {
    const double s = svd.singular_values(j);
    gains(j) = s / (s * s + lambda);
    const double shrink = s * gains(j);  // sigma^2 / (sigma^2 + lambda)
    residual_ss -= (2.0 * shrink - shrink * shrink) * coeffs(j) * coeffs(j);
  }
  RidgeFit fit;
  fit.lambda = lambda;
  fit.theta_hat = svd.right_vectors * gains.cwiseProduct(coeffs).matrix();
  fit.in_sample_residual_ss = std::max(residual_ss, 0.0);
  return fit;
}

/// Predicted labels X * theta_hat.
inline Vector predict(const Matrix& x, const RidgeFit& fit) {
  if (x.cols() != fit.theta_hat.size())
    throw DimensionError("predict: matrix has " + std::to_string(x.cols()) +
                         " columns, theta_hat has " +
                         std::to_string(fit.theta_hat.size()));
  return x * fit.theta_hat;
}

}  // namespace ridgeopt
