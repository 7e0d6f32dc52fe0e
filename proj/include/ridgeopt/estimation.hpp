#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ridgeopt/errors.hpp"
#include "ridgeopt/genmodel.hpp"
#include "ridgeopt/linalg.hpp"
#include "ridgeopt/risk.hpp"
#include "ridgeopt/rng.hpp"

namespace ridgeopt {

enum class NoiseMethod { Unregularized, RegularizedRank, CvOverparameterized };

inline const char* noise_method_name(NoiseMethod m) {
  switch (m) {
    case NoiseMethod::Unregularized: return "unregularized";
    case NoiseMethod::RegularizedRank: return "regularized_rank";
    case NoiseMethod::CvOverparameterized: return "cv_overparameterized";
  }
  return "?";
}

struct NoiseEstimate {
  double epsilon_hat = 0.0;
  NoiseMethod method = NoiseMethod::Unregularized;
  double regularized_rank_value = 0.0;
  double exponent_p = 0.0;
};

/// Regularized rank r_p = sum_j (sigma_j^2 / (sigma_j^2 + lambda))^p, the
/// effective dimension of the column-space projection. r_0 = k and r_p -> k
/// as lambda -> 0.
inline double regularized_rank(const Vector& singular_values, double lambda, double p) {
  if (p < 0.0) throw ConfigError("regularized_rank: p must be >= 0");
  double total = 0.0;
  for (Index j = 0; j < singular_values.size(); ++j) {
    const double s2 = singular_values(j) * singular_values(j);
    if (!(s2 + lambda > 0.0))
      throw NonconvexObjectiveError("regularized_rank: sigma^2 + lambda <= 0");
    total += p == 0.0 ? 1.0 : std::pow(s2 / (s2 + lambda), p);
  }
  return total;
}

/// Noise amplitude from the in-sample residual of a ridge fit, valid when the
/// residual retains a 1 - r_p/N share of the noise variance (d < N, or any
/// lambda > 0 with r_p < N):
///   eps_hat = sqrt( [RSS / (N-1)] / (1 - r_p / N) ).
/// With lambda = 0 this is the classical unregularized estimate.
inline NoiseEstimate estimate_noise_under(const SvdBundle& svd, const RidgeFit& fit,
                                          double p) {
  const double n = static_cast<double>(svd.n_rows);
  const double r_p = regularized_rank(svd.singular_values, fit.lambda, p);
  const double share = 1.0 - r_p / n;
  if (!(share > 0.0))
    throw DenominatorDegenerateError(
        "estimate_noise_under: r_p = " + std::to_string(r_p) + " >= N = " +
        std::to_string(svd.n_rows) + "; use the overparameterized estimate");
  NoiseEstimate est;
  est.epsilon_hat = std::sqrt(fit.in_sample_residual_ss / (n - 1.0) / share);
  est.method = fit.lambda == 0.0 ? NoiseMethod::Unregularized : NoiseMethod::RegularizedRank;
  est.regularized_rank_value = r_p;
  est.exponent_p = p;
  return est;
}

/// Noise amplitude via seeded k-fold cross-validation for d >= N, where the
/// training residual is useless (perfect fit at lambda = 0). Each fold is
/// re-centered before fitting, matching how every sample is generated. The
/// out-of-sample error estimate feeds
///   eps_hat = sqrt( (N/(N-1)) mse_oos / (1 + r_p / N) ),
/// with r_p computed from the full-sample spectrum.
inline NoiseEstimate estimate_noise_over(const Matrix& x, const Vector& y,
                                         double lambda0, double p, std::uint64_t seed,
                                         int folds = 2,
                                         const SvdBundle* full_svd = nullptr) {
  if (folds < 2) throw ConfigError("estimate_noise_over: need at least 2 folds");
  const Index n = x.rows();
  if (n < 2 * folds)
    throw DegenerateSampleError("estimate_noise_over: need N >= " +
                                std::to_string(2 * folds) + " rows, got " +
                                std::to_string(n));
  if (y.size() != n) throw DimensionError("estimate_noise_over: y length mismatch");
  if (!(lambda0 > 0.0)) throw ConfigError("estimate_noise_over: lambda0 must be > 0");

  SvdBundle local;
  if (full_svd == nullptr) {
    local = decompose_centered(x);
    full_svd = &local;
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_index(i + 1)]);

  double weighted_mse = 0.0;
  Index offset = 0;
  for (int f = 0; f < folds; ++f) {
    const Index fold_size = n / folds + (f < n % folds ? 1 : 0);
    Matrix x_test(fold_size, x.cols());
    Vector y_test(fold_size);
    Matrix x_train(n - fold_size, x.cols());
    Vector y_train(n - fold_size);
    Index ti = 0, si = 0;
    for (Index i = 0; i < n; ++i) {
      const Index row = order[static_cast<std::size_t>(i)];
      if (i >= offset && i < offset + fold_size) {
        x_test.row(ti) = x.row(row);
        y_test(ti++) = y(row);
      } else {
        x_train.row(si) = x.row(row);
        y_train(si++) = y(row);
      }
    }
    offset += fold_size;

    const SvdBundle train_svd = decompose_centered(center_columns(x_train));
    const RidgeFit fit = ridge_solve(train_svd, center(y_train), lambda0);
    const Vector pred = predict(center_columns(x_test), fit);
    weighted_mse += (pred - center(y_test)).squaredNorm() / static_cast<double>(n);
  }

  const double r_p = regularized_rank(full_svd->singular_values, lambda0, p);
  const double nn = static_cast<double>(n);
  NoiseEstimate est;
  est.epsilon_hat = std::sqrt(nn / (nn - 1.0) * weighted_mse / (1.0 + r_p / nn));
  est.method = NoiseMethod::CvOverparameterized;
  est.regularized_rank_value = r_p;
  est.exponent_p = p;
  return est;
}

/// Signal-to-noise plug-in strength d * eps_hat^2 / ||theta_hat||^2.
inline double lambda_signal_to_noise(Index d, double epsilon_hat, double theta_hat_norm) {
  if (!(theta_hat_norm > 0.0))
    throw DegenerateParameterError("lambda_signal_to_noise: zero parameter norm");
  return static_cast<double>(d) * epsilon_hat * epsilon_hat / (theta_hat_norm * theta_hat_norm);
}

enum class RecMethod { Sfp, Sn, Default };

/// Output of the sample-based optimizer with the estimates that produced it.
struct RegStrengthRecommendation {
  double lambda = 0.0;
  RecMethod method = RecMethod::Sfp;
  double epsilon_hat_used = 0.0;
  double theta_hat_norm = 0.0;
  NoiseEstimate noise;
  FixedPointOutcome fixed_point;
};

struct SampleOptOptions {
  double lambda0 = 1.0;
  double p = 0.25;
  double delta = 1e-4;
  int folds = 2;
  std::size_t max_iter = 1000;
};

/// Sample-based optimal regularization: one SVD, a preliminary ridge estimate
/// of theta at lambda0, the applicable noise estimate (in-sample residual for
/// d < N, cross-validation for d >= N), then the fixed-point iteration on the
/// estimated inputs. x must be column-centered and y mean-centered.
inline RegStrengthRecommendation sample_opt_reg(const Matrix& x, const Vector& y,
                                                const SampleOptOptions& opt,
                                                std::uint64_t seed,
                                                const SvdBundle* precomputed = nullptr) {
  if (!(opt.lambda0 > 0.0)) throw ConfigError("sample_opt_reg: lambda0 must be > 0");
  SvdBundle local;
  if (precomputed == nullptr) {
    local = decompose_centered(x);
    precomputed = &local;
  }
  const SvdBundle& svd = *precomputed;

  const RidgeFit fit = ridge_solve(svd, y, opt.lambda0);
  const bool overparameterized = x.cols() >= x.rows();
  const NoiseEstimate noise =
      overparameterized
          ? estimate_noise_over(x, y, opt.lambda0, opt.p, seed, opt.folds, &svd)
          : estimate_noise_under(svd, fit, opt.p);

  const RiskInputs inputs = make_risk_inputs(svd, fit.theta_hat, noise.epsilon_hat);
  RegStrengthRecommendation rec;
  rec.fixed_point = model_opt_reg(inputs, opt.lambda0, opt.delta, opt.max_iter);
  rec.lambda = rec.fixed_point.lambda_star;
  rec.method = RecMethod::Sfp;
  rec.epsilon_hat_used = noise.epsilon_hat;
  rec.theta_hat_norm = fit.theta_hat.norm();
  rec.noise = noise;
  return rec;
}

}  // namespace ridgeopt
