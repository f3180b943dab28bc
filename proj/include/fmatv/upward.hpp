#pragma once

// Arithmetic rounded toward +Inf, built from error-free transformations so it
// does not depend on the dynamic rounding mode. Used to evaluate error bounds
// so that the binary64 result never underestimates the real-valued bound.

#include <cmath>
#include <limits>

namespace fmatv::upward {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double add(double x, double y) {
  const double s = x + y;
  if (!std::isfinite(s)) return s;
  // TwoSum: s + err == x + y exactly.
  const double bp = s - x;
  const double err = (x - (s - bp)) + (y - bp);
  return err > 0 ? std::nextafter(s, kInf) : s;
}

inline double mul(double x, double y) {
  const double p = x * y;
  if (!std::isfinite(p)) return p;
  // Below this magnitude the fma residual can itself underflow; step up
  // unconditionally instead.
  if (std::fabs(p) < 0x1p-968) {
    if (x == 0 || y == 0) return p;
    return std::nextafter(p, kInf);
  }
  const double err = std::fma(x, y, -p);
  return err > 0 ? std::nextafter(p, kInf) : p;
}

}  // namespace fmatv::upward
