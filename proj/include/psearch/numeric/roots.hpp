#ifndef PSEARCH_NUMERIC_ROOTS_HPP
#define PSEARCH_NUMERIC_ROOTS_HPP

#include <cmath>
#include <stdexcept>

namespace psearch::numeric {

/// Bisection on [lo, hi] for a function whose sign differs at the ends.
/// Stops when the bracket is narrower than `tolerance` or cannot shrink.
template <class F>
double bisect(F&& f, double lo, double hi, double tolerance) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw std::domain_error("bisect: root is not bracketed");
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi || hi - lo <= tolerance) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

}  // namespace psearch::numeric

#endif  // PSEARCH_NUMERIC_ROOTS_HPP
