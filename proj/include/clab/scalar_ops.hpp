#pragma once

#include <cmath>
#include <cstdint>

namespace clab::scalar_ops {

// Shared per-lane primitives. The tree evaluator and both batch kernels call
// exactly these, so all evaluation paths agree bit-for-bit.

// flatexp(t,p) = exp(-1/t)/t^p for t > 0, 0 otherwise. Evaluated through a
// single exp so no intermediate over/underflow occurs for extreme t.
inline double flatexp_val(double t, int p) {
  if (!(t > 0.0)) return 0.0;
  if (p == 0) return std::exp(-1.0 / t);
  return std::exp(-1.0 / t - static_cast<double>(p) * std::log(t));
}

// smoothstep: 0 for t<=0, 1 for t>=1, g(t)/(g(t)+g(1-t)) with g(t)=exp(-1/t)
// in between. The denominator is bounded below by exp(-2) on (0,1).
inline double smoothstep_val(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double ga = std::exp(-1.0 / t);
  const double gb = std::exp(-1.0 / (1.0 - t));
  return ga / (ga + gb);
}

// Integer power by repeated squaring; exact on dyadic bases, identical
// operation order on every evaluation path.
inline double pow_int(double base, std::int64_t e) {
  if (e == 0) return 1.0;
  const bool inv = e < 0;
  std::uint64_t n = inv ? static_cast<std::uint64_t>(-(e + 1)) + 1
                        : static_cast<std::uint64_t>(e);
  double acc = 1.0;
  double b = base;
  while (n > 0) {
    if (n & 1u) acc *= b;
    n >>= 1u;
    if (n) b *= b;
  }
  return inv ? 1.0 / acc : acc;
}

inline double pow_rat(double base, double exponent) {
  return std::pow(base, exponent);
}

}  // namespace clab::scalar_ops
