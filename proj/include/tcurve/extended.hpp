#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace tcurve {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute slack used by every inequality check unless overridden.
inline constexpr double kDefaultTolerance = 1e-9;

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

/// Raised for malformed or invariant-violating inputs (maps to CLI exit code 2).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// |a - b| on the extended line, with |inf - inf| = inf.
inline double abs_diff(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return kInf;
  return std::fabs(a - b);
}

/// Product with the measure-theoretic convention 0 * inf = 0.
inline double mul0(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

/// lhs <= rhs up to `tol`, where the slack grows with |rhs| once |rhs| > 1.
inline bool leq(double lhs, double rhs, double tol) {
  if (std::isinf(rhs) && rhs > 0) return true;
  if (std::isinf(lhs) && lhs > 0) return false;
  const double scale = std::fabs(rhs) > 1.0 ? std::fabs(rhs) : 1.0;
  return lhs <= rhs + tol * scale;
}

}  // namespace tcurve
