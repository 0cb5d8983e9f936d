#include "clab/interval.hpp"

#include <algorithm>
#include <cmath>

#include "clab/scalar_ops.hpp"

namespace clab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Ival widen(Ival v) {
  // Small symmetric inflation so plain rounding cannot flip a containment
  // verdict; exact endpoints 0/1/constants stay exact.
  const double r = 1e-14;
  double lo = v.lo, hi = v.hi;
  if (std::isfinite(lo) && lo != 0.0) lo -= std::fabs(lo) * r;
  if (std::isfinite(hi) && hi != 0.0) hi += std::fabs(hi) * r;
  return {lo, hi, v.lo_open};
}

Ival add(Ival a, Ival b) { return widen({a.lo + b.lo, a.hi + b.hi}); }
Ival sub(Ival a, Ival b) { return widen({a.lo - b.hi, a.hi - b.lo}); }
Ival neg(Ival a) { return {-a.hi, -a.lo}; }

double mul_end(double x, double y) {
  // 0 * inf is 0 for interval endpoints.
  if ((x == 0.0 && std::isinf(y)) || (y == 0.0 && std::isinf(x))) return 0.0;
  return x * y;
}

Ival mul(Ival a, Ival b) {
  double c[4] = {mul_end(a.lo, b.lo), mul_end(a.lo, b.hi),
                 mul_end(a.hi, b.lo), mul_end(a.hi, b.hi)};
  Ival r{*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
  // A product of non-negative factors attains 0 only when a factor does.
  if (a.lo >= 0.0 && b.lo >= 0.0 && r.lo == 0.0)
    r.lo_open = !a.attains_zero() && !b.attains_zero();
  return widen(r);
}

Ival inverse(Ival a) {
  if (a.attains_zero()) return Ival::whole();
  if (a.lo == 0.0 && a.lo_open) {
    // (0+, hi] inverts to [1/hi, +inf).
    return widen({a.hi > 0.0 ? 1.0 / a.hi : 0.0, kInf});
  }
  return widen({1.0 / a.hi, 1.0 / a.lo});
}

Ival monotone_inc(Ival a, double (*f)(double)) {
  return widen({f(a.lo), f(a.hi)});
}

Ival pow_interval(Ival a, const Rational& q) {
  using scalar_ops::pow_int;
  if (q.is_integer()) {
    std::int64_t n = q.num();
    if (n == 0) return Ival::point(1.0);
    if (n < 0) {
      Ival inv = inverse(a);
      if (!inv.bounded() && a.attains_zero()) return Ival::whole();
      return pow_interval(inv, Rational(-n));
    }
    if (n % 2 == 0) {
      double m = std::max(std::fabs(a.lo), std::fabs(a.hi));
      double top = pow_int(m, n);
      bool crosses = a.lo <= 0.0 && a.hi >= 0.0;
      double bot = crosses
                       ? 0.0
                       : pow_int(std::min(std::fabs(a.lo), std::fabs(a.hi)), n);
      Ival r{bot, top};
      if (crosses && bot == 0.0) r.lo_open = !a.attains_zero();
      return widen(r);
    }
    Ival r{pow_int(a.lo, n), pow_int(a.hi, n)};
    if (r.lo == 0.0) r.lo_open = a.lo == 0.0 && a.lo_open;
    return widen(r);
  }
  // Fractional exponent: domain is positive bases; widen from below at 0.
  if (a.hi <= 0.0) return Ival::whole();
  double lo = std::max(a.lo, 0.0);
  double q_d = q.to_double();
  double vlo = std::pow(lo, q_d), vhi = std::pow(a.hi, q_d);
  if (q_d < 0.0) std::swap(vlo, vhi);
  if (std::isnan(vlo) || std::isnan(vhi)) return Ival::whole();
  Ival r{vlo, vhi};
  if (r.lo == 0.0 && q_d > 0.0) r.lo_open = a.lo <= 0.0 ? a.lo_open : false;
  return widen(r);
}

Ival flatexp_interval(Ival a, int p) {
  using scalar_ops::flatexp_val;
  if (a.hi <= 0.0) return Ival::point(0.0);
  auto val = [&](double t) { return flatexp_val(t, p); };
  double lo_t = a.lo, hi_t = a.hi;
  if (p == 0) {
    // Monotone increasing.
    return widen({val(lo_t), std::isinf(hi_t) ? 1.0 : val(hi_t)});
  }
  // Unimodal with max at t = 1/p.
  double peak = 1.0 / static_cast<double>(p);
  double top;
  if (lo_t <= peak && peak <= hi_t)
    top = val(peak);
  else
    top = std::max(val(lo_t), std::isinf(hi_t) ? 0.0 : val(hi_t));
  double bottom = std::min(val(std::max(lo_t, 0.0)),
                           std::isinf(hi_t) ? 0.0 : val(hi_t));
  if (lo_t <= 0.0) bottom = 0.0;
  return widen({bottom, top});
}

Ival eval_rec(const Expr& e, const Ival& er, std::span<const Ival> boxes) {
  switch (e.op()) {
    case Op::Const:
      return Ival::point(e.value().to_double());
    case Op::Eps:
      return er;
    case Op::Var: {
      int i = e.var_index();
      if (i >= 1 && static_cast<std::size_t>(i) <= boxes.size())
        return boxes[i - 1];
      return Ival::whole();
    }
    case Op::Neg:
      return neg(eval_rec(e.child_a(), er, boxes));
    case Op::Exp: {
      Ival a = eval_rec(e.child_a(), er, boxes);
      return widen({std::exp(a.lo), std::exp(a.hi)});
    }
    case Op::Log: {
      Ival a = eval_rec(e.child_a(), er, boxes);
      if (a.hi <= 0.0) return Ival::whole();
      double lo = a.lo <= 0.0 ? -kInf : std::log(a.lo);
      return widen({lo, std::log(a.hi)});
    }
    case Op::Sin:
    case Op::Cos: {
      (void)eval_rec(e.child_a(), er, boxes);
      return {-1.0, 1.0};
    }
    case Op::Atan: {
      Ival a = eval_rec(e.child_a(), er, boxes);
      return monotone_inc(a, [](double x) { return std::atan(x); });
    }
    case Op::Abs: {
      Ival a = eval_rec(e.child_a(), er, boxes);
      if (a.lo >= 0.0) return a;
      if (a.hi <= 0.0) return neg(a);
      return {0.0, std::max(std::fabs(a.lo), a.hi)};
    }
    case Op::Smoothstep: {
      Ival a = eval_rec(e.child_a(), er, boxes);
      double lo = scalar_ops::smoothstep_val(a.lo);
      double hi = std::isinf(a.hi) ? 1.0 : scalar_ops::smoothstep_val(a.hi);
      if (std::isinf(a.lo)) lo = a.lo > 0 ? 1.0 : 0.0;
      return widen({lo, hi});
    }
    case Op::FlatExp:
      return flatexp_interval(eval_rec(e.child_a(), er, boxes),
                              e.flatexp_order());
    case Op::Add:
      return add(eval_rec(e.child_a(), er, boxes),
                 eval_rec(e.child_b(), er, boxes));
    case Op::Sub:
      return sub(eval_rec(e.child_a(), er, boxes),
                 eval_rec(e.child_b(), er, boxes));
    case Op::Mul:
      return mul(eval_rec(e.child_a(), er, boxes),
                 eval_rec(e.child_b(), er, boxes));
    case Op::Div:
      return mul(eval_rec(e.child_a(), er, boxes),
                 inverse(eval_rec(e.child_b(), er, boxes)));
    case Op::Pow:
      return pow_interval(eval_rec(e.child_a(), er, boxes), e.value());
  }
  return Ival::whole();
}

}  // namespace

Ival eval_interval(const Expr& e, const Ival& eps_range,
                   std::span<const Ival> coord_boxes) {
  return eval_rec(e, eps_range, coord_boxes);
}

Sign interval_sign(const Ival& v) {
  if (v.lo == 0.0 && v.hi == 0.0 && !v.lo_open) return Sign::Zero;
  if (v.lo > 0.0) return Sign::Positive;
  if (v.lo == 0.0 && v.lo_open && v.hi > 0.0) return Sign::Positive;
  if (v.hi < 0.0) return Sign::Negative;
  if (v.lo >= 0.0) return Sign::NonNegative;
  if (v.hi <= 0.0) return Sign::NonPositive;
  return Sign::Unknown;
}

}  // namespace clab
