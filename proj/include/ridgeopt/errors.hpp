#pragma once

#include <stdexcept>
#include <string>

namespace ridgeopt {

/// Base class for all contract violations raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Too few rows to center or split a sample.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// Design matrix is numerically rank-deficient (sigma_min < 1e-12 * sigma_max).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// lambda at or below -sigma_min^2: the penalized objective is no longer strictly convex.
class NonconvexObjectiveError : public Error {
 public:
  using Error::Error;
};

/// Every projection v_j^T theta vanishes, so the fixed-point operator is undefined.
class DegenerateParameterError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// r_p >= N: the residual-based noise estimate has a nonpositive denominator.
class DenominatorDegenerateError : public Error {
 public:
  using Error::Error;
};

/// Search interval is empty after clamping to the feasible lambda range.
class EmptyIntervalError : public Error {
 public:
  using Error::Error;
};

/// Config or input-file schema violation; message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ridgeopt
