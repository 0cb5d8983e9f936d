#pragma once

#include <limits>

#include "clab/expr.hpp"

namespace clab {

// Closed-interval range analysis over expressions; the "bounded fragment"
// oracle behind symbolic containment and boundedness decisions. Endpoints may
// be +-infinity. The eps interval may include 0 so conclusions hold in the
// limit eps -> 0 (log, 1/eps and friends then widen to infinite endpoints).
//
// Rounding is not directed; results are inflated by a small relative margin,
// and callers keep a safety gap when testing containment. Structural facts
// (sin into [-1,1], smoothstep into [0,1], flatexp into [0, sup]) are exact.
struct Ival {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  // The infimum is approached but never attained (the eps germ [0+, eps0]
  // and ranges derived from it); lets 1/eps stay one-sided instead of
  // collapsing to the whole line.
  bool lo_open = false;

  bool bounded() const {
    return lo > -std::numeric_limits<double>::infinity() &&
           hi < std::numeric_limits<double>::infinity();
  }
  bool attains_zero() const {
    return lo <= 0.0 && hi >= 0.0 && !(lo == 0.0 && lo_open);
  }
  static Ival whole() { return {}; }
  static Ival point(double v) { return {v, v}; }
};

// coord_boxes[i] bounds x_{i+1}. Never throws on domain issues; those widen
// to infinite intervals.
Ival eval_interval(const Expr& e, const Ival& eps_range,
                   std::span<const Ival> coord_boxes);

// The eps germ: eps in (0, eps_hi].
inline Ival eps_germ(double eps_hi) { return {0.0, eps_hi, true}; }

// Sign over the whole domain of an eps-only net, derived from the same
// analysis: the interval for eps in [0, eps0].
enum class Sign { Positive, Negative, Zero, NonNegative, NonPositive, Unknown };
Sign interval_sign(const Ival& v);

}  // namespace clab
