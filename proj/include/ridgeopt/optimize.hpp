#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "ridgeopt/errors.hpp"

namespace ridgeopt {

struct ScalarMin {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out.push_back(std::exp(llo + t * (lhi - llo)));
  }
  return out;
}

inline std::vector<double> linear_grid(double lo, double hi, int points) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out.push_back(lo + t * (hi - lo));
  }
  return out;
}

/// Golden-section minimization on [a, b]; returns the best point evaluated.
/// Termination: interval width <= rel_tol * (|x1| + |x2| + rel_tol).
template <class F>
ScalarMin golden_section_minimize(F&& f, double a, double b, double rel_tol,
                                  int max_iter = 200) {
  constexpr double invphi = 0.6180339887498949;
  if (b < a) std::swap(a, b);
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  ScalarMin best = f1 <= f2 ? ScalarMin{x1, f1} : ScalarMin{x2, f2};
  for (int it = 0; it < max_iter; ++it) {
    if (b - a <= rel_tol * (std::abs(x1) + std::abs(x2) + rel_tol)) break;
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
    if (f1 < best.value) best = {x1, f1};
    if (f2 < best.value) best = {x2, f2};
  }
  return best;
}

/// Coarse grid scan followed by golden-section refinement of the best bracket.
///
/// The grid is 512 log-spaced points on [max(lower, 1e-8), upper], a 64-point
/// linear segment on [lower, 0) when lower < 0, and 0 itself. Refinement runs
/// to 1e-10 relative; the returned minimum never exceeds any grid evaluation.
template <class F>
std::pair<double, double> grid_refine_minimize(F&& f, double lower, double upper) {
  if (!(lower < upper)) throw EmptyIntervalError("minimize: empty interval");

  std::vector<double> grid;
  if (lower < 0.0) {
    for (double v : linear_grid(lower, 0.0, 65)) {
      if (v < 0.0) grid.push_back(v);
    }
    grid.push_back(0.0);
  } else if (lower < 1e-8) {
    grid.push_back(lower);
  }
  const double pos_lo = std::max(lower, 1e-8);
  if (pos_lo < upper) {
    for (double v : log_grid(pos_lo, upper, 512)) grid.push_back(v);
  } else {
    grid.push_back(upper);
  }

  std::size_t best_i = 0;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = f(grid[i]);
    if (values[i] < best_f) {
      best_f = values[i];
      best_i = i;
    }
  }

  const double bracket_lo = best_i == 0 ? grid.front() : grid[best_i - 1];
  const double bracket_hi = best_i + 1 == grid.size() ? grid.back() : grid[best_i + 1];
  ScalarMin refined{grid[best_i], best_f};
  if (bracket_hi > bracket_lo) {
    const ScalarMin inner = golden_section_minimize(f, bracket_lo, bracket_hi, 1e-10);
    if (inner.value < refined.value) refined = inner;
  }
  return {refined.x, refined.value};
}

}  // namespace ridgeopt
