#include "clab/rational.hpp"

#include <cmath>

namespace clab {

Rational Rational::approximate(double x, double tol) {
  if (!std::isfinite(x)) throw std::invalid_argument("approximate: non-finite");
  // Continued-fraction convergents until the requested tolerance.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int i = 0; i < 64; ++i) {
    double fa = std::floor(r);
    if (fa > 9e17 || fa < -9e17) break;
    std::int64_t a = static_cast<std::int64_t>(fa);
    __int128 p2 = (__int128)a * p1 + p0;
    __int128 q2 = (__int128)a * q1 + q0;
    if (p2 > INT64_MAX || p2 < INT64_MIN || q2 > INT64_MAX) break;
    p0 = p1;
    q0 = q1;
    p1 = static_cast<std::int64_t>(p2);
    q1 = static_cast<std::int64_t>(q2);
    if (q1 > 0 &&
        std::fabs(static_cast<double>(p1) / static_cast<double>(q1) - x) < tol)
      return Rational(p1, q1);
    double frac = r - fa;
    if (frac < 1e-18) break;
    r = 1.0 / frac;
  }
  if (q1 == 0) throw std::invalid_argument("approximate: no convergent");
  return Rational(p1, q1);
}

}  // namespace clab
