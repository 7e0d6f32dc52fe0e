#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ridgeopt/errors.hpp"
#include "ridgeopt/linalg.hpp"
#include "ridgeopt/optimize.hpp"

namespace ridgeopt {

/// Bounds of the global regularization-strength search.
inline constexpr double kLambdaSearchLower = -1.0;
inline constexpr double kLambdaSearchUpper = 1e6;

/// Everything the analytic risk formulas need: the spectrum sigma_j of the
/// centered design, the projections p_j = v_j^T theta of the generative
/// parameter on the right singular vectors, the noise amplitude, and the
/// sample size N.
///
/// theta_tail_ss is the squared mass of theta outside the span of the right
/// singular vectors (nonzero only when d > N). It is bookkeeping for
/// diagnostics; no formula below includes it, since those components carry
/// zero weight in the prediction.
struct RiskInputs {
  Vector singular_values;
  Vector projections;
  double theta_tail_ss = 0.0;
  double epsilon = 0.0;
  Index n = 0;

  Index rank() const { return singular_values.size(); }
  double min_feasible_lambda() const {
    const double smin = singular_values(rank() - 1);
    return -smin * smin * (1.0 - kLambdaGuardMargin);
  }
};

inline RiskInputs make_risk_inputs(const SvdBundle& svd, const Vector& theta,
                                   double epsilon) {
  if (theta.size() != svd.n_cols)
    throw DimensionError("make_risk_inputs: theta has " + std::to_string(theta.size()) +
                         " entries, design has " + std::to_string(svd.n_cols) +
                         " columns");
  if (epsilon < 0.0) throw ConfigError("make_risk_inputs: epsilon must be nonnegative");
  RiskInputs inputs;
  inputs.singular_values = svd.singular_values;
  inputs.projections = svd.right_vectors.transpose() * theta;
  inputs.theta_tail_ss =
      std::max(theta.squaredNorm() - inputs.projections.squaredNorm(), 0.0);
  inputs.epsilon = epsilon;
  inputs.n = svd.n_rows;
  return inputs;
}

/// Expected out-of-sample MSE at one lambda, split into its parts.
/// expected_oos_mse = (bias_sq + variance) / N + epsilon^2.
struct RiskReport {
  double lambda = 0.0;
  double bias_sq = 0.0;
  double variance = 0.0;
  double expected_oos_mse = 0.0;
  double stationarity_residual = 0.0;  // (lambda * D - eps^2 * A) / (1 + lambda)
};

struct FixedPointOutcome {
  double lambda_star = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double final_step = 0.0;
  bool fallback_used = false;
  double mse_at_lambda = 0.0;
};

namespace detail {

inline void check_feasible(const RiskInputs& inputs, double lambda) {
  if (!(lambda > inputs.min_feasible_lambda()))
    throw NonconvexObjectiveError("risk: lambda = " + std::to_string(lambda) +
                                  " <= -sigma_min^2");
}

// Power sums over the spectrum used throughout: A_q = sum sigma^4 / (sigma^2 + lambda)^q
// and D_q = sum sigma^4 p^2 / (sigma^2 + lambda)^q.
struct PowerSums {
  double a3 = 0.0, a4 = 0.0, d3 = 0.0, d4 = 0.0;
};

inline PowerSums power_sums(const RiskInputs& inputs, double lambda) {
  PowerSums sums;
  for (Index j = 0; j < inputs.rank(); ++j) {
    const double s2 = inputs.singular_values(j) * inputs.singular_values(j);
    const double denom = s2 + lambda;
    const double w3 = s2 * s2 / (denom * denom * denom);
    const double w4 = w3 / denom;
    const double p2 = inputs.projections(j) * inputs.projections(j);
    sums.a3 += w3;
    sums.a4 += w4;
    sums.d3 += w3 * p2;
    sums.d4 += w4 * p2;
  }
  return sums;
}

}  // namespace detail

/// Squared prediction bias: sum_j (lambda sigma_j p_j / (sigma_j^2 + lambda))^2.
inline double bias_sq(const RiskInputs& inputs, double lambda) {
  detail::check_feasible(inputs, lambda);
  double total = 0.0;
  for (Index j = 0; j < inputs.rank(); ++j) {
    const double s = inputs.singular_values(j);
    const double term = lambda * s * inputs.projections(j) / (s * s + lambda);
    total += term * term;
  }
  return total;
}

/// Prediction variance: epsilon^2 sum_j (sigma_j^2 / (sigma_j^2 + lambda))^2.
inline double variance(const RiskInputs& inputs, double lambda) {
  detail::check_feasible(inputs, lambda);
  double total = 0.0;
  for (Index j = 0; j < inputs.rank(); ++j) {
    const double s2 = inputs.singular_values(j) * inputs.singular_values(j);
    const double ratio = s2 / (s2 + lambda);
    total += ratio * ratio;
  }
  return inputs.epsilon * inputs.epsilon * total;
}

/// First-order stationarity defect of the expected MSE, reported as
/// LHS - RHS of lambda * D3 = eps^2 * A3 scaled by 1 / (1 + lambda) so values
/// are comparable across lambda magnitudes. Zero exactly at critical points.
inline double stationarity_residual(const RiskInputs& inputs, double lambda) {
  detail::check_feasible(inputs, lambda);
  const auto sums = detail::power_sums(inputs, lambda);
  return (lambda * sums.d3 - inputs.epsilon * inputs.epsilon * sums.a3) / (1.0 + lambda);
}

inline RiskReport expected_mse(const RiskInputs& inputs, double lambda) {
  RiskReport report;
  report.lambda = lambda;
  report.bias_sq = bias_sq(inputs, lambda);
  report.variance = variance(inputs, lambda);
  report.expected_oos_mse = (report.bias_sq + report.variance) / static_cast<double>(inputs.n) +
                            inputs.epsilon * inputs.epsilon;
  report.stationarity_residual = stationarity_residual(inputs, lambda);
  return report;
}

/// The fixed-point operator H with lambda = eps^2 H(lambda) at critical points:
/// H = [sum sigma^4 / (sigma^2+lambda)^3] / [sum sigma^4 p^2 / (sigma^2+lambda)^3].
inline double h_operator(const RiskInputs& inputs, double lambda) {
  detail::check_feasible(inputs, lambda);
  const auto sums = detail::power_sums(inputs, lambda);
  if (!(sums.d3 > 0.0))
    throw DegenerateParameterError(
        "h_operator: every projection v_j^T theta vanishes");
  return sums.a3 / sums.d3;
}

/// dH/dlambda = 3 (A - B) with
///   A = [sum w3] [sum w4 p^2] / [sum w3 p^2]^2,  B = [sum w4] / [sum w3 p^2],
/// where w_q = sigma^4 / (sigma^2 + lambda)^q.
inline double h_derivative(const RiskInputs& inputs, double lambda) {
  detail::check_feasible(inputs, lambda);
  const auto sums = detail::power_sums(inputs, lambda);
  if (!(sums.d3 > 0.0))
    throw DegenerateParameterError(
        "h_derivative: every projection v_j^T theta vanishes");
  const double a = sums.a3 * sums.d4 / (sums.d3 * sums.d3);
  const double b = sums.a4 / sums.d3;
  return 3.0 * (a - b);
}

/// Global minimizer of the expected MSE over (lower, upper), clamped to the
/// feasible lambda range. Coarse grid plus golden-section refinement; see
/// grid_refine_minimize for the grid layout.
inline std::pair<double, double> lambda_min_search(const RiskInputs& inputs,
                                                   double lower, double upper) {
  const double smin = inputs.singular_values(inputs.rank() - 1);
  // one extra guard step inside the open feasible interval, so the grid's own
  // endpoint is evaluable
  const double lo = std::max(lower, inputs.min_feasible_lambda() +
                                        kLambdaGuardMargin * smin * smin);
  if (!(lo < upper)) throw EmptyIntervalError("lambda_min_search: empty interval");
  auto objective = [&](double lambda) {
    return expected_mse(inputs, lambda).expected_oos_mse;
  };
  return grid_refine_minimize(objective, lo, upper);
}

/// Fixed-point iteration lambda <- eps^2 H(lambda) from lambda0, stopping when
/// consecutive iterates differ by at most delta. Returns the optimal strength
/// and the Eq.-6 MSE there. On non-convergence the bounded global search takes
/// over and fallback_used is set.
inline FixedPointOutcome model_opt_reg(const RiskInputs& inputs, double lambda0,
                                       double delta, std::size_t max_iter = 1000) {
  if (lambda0 < 0.0) throw ConfigError("model_opt_reg: lambda0 must be >= 0");
  if (!(delta > 0.0)) throw ConfigError("model_opt_reg: delta must be > 0");

  const double eps2 = inputs.epsilon * inputs.epsilon;
  FixedPointOutcome out;
  double lambda = lambda0;
  double prev = lambda0 + 2.0 * delta;
  while (out.iterations < max_iter) {
    if (std::abs(lambda - prev) <= delta) {
      out.converged = true;
      break;
    }
    prev = lambda;
    lambda = eps2 * h_operator(inputs, lambda);
    ++out.iterations;
    if (!std::isfinite(lambda)) break;
  }
  out.final_step = std::abs(lambda - prev);

  if (out.converged) {
    out.lambda_star = lambda;
  } else {
    const auto [lmin, _] = lambda_min_search(inputs, kLambdaSearchLower, kLambdaSearchUpper);
    out.lambda_star = lmin;
    out.fallback_used = true;
  }
  out.mse_at_lambda = expected_mse(inputs, out.lambda_star).expected_oos_mse;
  return out;
}

/// sup over the grid of eps^2 |H'(lambda)|; values below 1 certify empirical
/// contraction of the fixed-point map on the grid.
inline double contraction_diagnostic(const RiskInputs& inputs,
                                     const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty())
    throw ConfigError("contraction_diagnostic: empty lambda grid");
  const double eps2 = inputs.epsilon * inputs.epsilon;
  if (eps2 == 0.0) return 0.0;
  double sup = 0.0;
  for (double lambda : lambda_grid) {
    if (lambda < 0.0)
      throw ConfigError("contraction_diagnostic: grid values must be >= 0");
    sup = std::max(sup, eps2 * std::abs(h_derivative(inputs, lambda)));
  }
  return sup;
}

}  // namespace ridgeopt
