#include "clab/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace clab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or_cap(double v) {
  if (std::isnan(v)) return 0.0;
  if (std::isinf(v)) return v > 0 ? 1.7976931348623157e308 : -1.7976931348623157e308;
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool nonneg_sign(Sign s) {
  return s == Sign::Positive || s == Sign::NonNegative || s == Sign::Zero;
}
bool nonpos_sign(Sign s) {
  return s == Sign::Negative || s == Sign::NonPositive || s == Sign::Zero;
}
bool strict_sign(Sign s) { return s == Sign::Positive || s == Sign::Negative; }

Sign neg_sign(Sign s) {
  switch (s) {
    case Sign::Positive: return Sign::Negative;
    case Sign::Negative: return Sign::Positive;
    case Sign::NonNegative: return Sign::NonPositive;
    case Sign::NonPositive: return Sign::NonNegative;
    default: return s;
  }
}

Sign mul_sign(Sign a, Sign b) {
  if (a == Sign::Zero || b == Sign::Zero) return Sign::Zero;
  if (a == Sign::Unknown || b == Sign::Unknown) return Sign::Unknown;
  const bool a_neg = a == Sign::Negative || a == Sign::NonPositive;
  const bool b_neg = b == Sign::Negative || b == Sign::NonPositive;
  const bool strict = strict_sign(a) && strict_sign(b);
  if (a_neg == b_neg) return strict ? Sign::Positive : Sign::NonNegative;
  return strict ? Sign::Negative : Sign::NonPositive;
}

// Extended-real addition for valuation bounds; the caller names the result
// for the indeterminate form inf + (-inf).
double ext_add(double a, double b, double indeterminate) {
  if ((a == kInf && b == -kInf) || (a == -kInf && b == kInf))
    return indeterminate;
  return a + b;
}

using Info = Valuation;

Info make_zero_info() {
  return {kInf, kInf, true, Sign::Zero, Ival::point(0.0)};
}

Info add_infos(const Info& a, const Info& b, const Ival& range) {
  Info r;
  r.range = range;
  const bool compatible = (nonneg_sign(a.sign) && nonneg_sign(b.sign)) ||
                          (nonpos_sign(a.sign) && nonpos_sign(b.sign));
  r.lo = std::min(a.lo, b.lo);
  if (a.exact && b.exact && (compatible || a.lo != b.lo)) {
    // Either no cancellation is possible, or the lower-order term dominates
    // two-sidedly.
    r.exact = true;
    r.lo = r.hi = std::min(a.lo, b.lo);
  } else if (compatible) {
    r.exact = false;
    r.hi = std::min(a.hi, b.hi);
  } else {
    r.exact = false;
    r.hi = kInf;
  }
  if (compatible) {
    if (a.sign == Sign::Zero)
      r.sign = b.sign;
    else if (b.sign == Sign::Zero)
      r.sign = a.sign;
    else if (nonneg_sign(a.sign))
      r.sign = (a.sign == Sign::Positive || b.sign == Sign::Positive)
                   ? Sign::Positive
                   : Sign::NonNegative;
    else
      r.sign = (a.sign == Sign::Negative || b.sign == Sign::Negative)
                   ? Sign::Negative
                   : Sign::NonPositive;
  } else {
    r.sign = interval_sign(range);
  }
  return r;
}

Info mul_infos(const Info& a, const Info& b, const Ival& range) {
  Info r;
  r.range = range;
  r.sign = mul_sign(a.sign, b.sign);
  if (a.exact && b.exact &&
      !((a.lo == kInf && b.lo == -kInf) || (a.lo == -kInf && b.lo == kInf))) {
    r.exact = true;
    r.lo = r.hi = ext_add(a.lo, b.lo, 0.0);
    return r;
  }
  r.exact = false;
  r.lo = ext_add(a.lo, b.lo, -kInf);
  r.hi = kInf;
  return r;
}

Info unknown_info(const Ival& range) {
  return {-kInf, kInf, false, interval_sign(range), range};
}

Info inverse_info(const Info& b, const Ival& range) {
  if (!strict_sign(interval_sign(b.range)) && !strict_sign(b.sign))
    return unknown_info(range);
  Info r;
  r.range = range;
  r.sign = b.sign;  // 1/x keeps the sign
  if (b.exact) {
    r.exact = true;
    r.lo = r.hi = -b.lo;
    return r;
  }
  r.exact = false;
  r.hi = -b.lo;  // |b| <= C eps^(lo-δ)  =>  |1/b| >= c eps^(-lo+δ)
  r.lo = -kInf;
  return r;
}

struct Analyzer {
  double eps_hi;
  std::unordered_map<const detail::ExprNode*, Info> memo;

  Info visit(const Expr& e) {
    auto it = memo.find(e.raw());
    if (it != memo.end()) return it->second;
    Info r = compute(e);
    memo.emplace(e.raw(), r);
    return r;
  }

  Ival range_of(const Expr& e) {
    return eval_interval(e, eps_germ(eps_hi), {});
  }

  Info compute(const Expr& e) {
    switch (e.op()) {
      case Op::Const: {
        if (e.value().is_zero()) return make_zero_info();
        double v = e.value().to_double();
        return {0.0, 0.0, true,
                v > 0 ? Sign::Positive : Sign::Negative, Ival::point(v)};
      }
      case Op::Eps:
        return {1.0, 1.0, true, Sign::Positive, eps_germ(eps_hi)};
      case Op::Var:
        throw ExprError("symbolic_valuation: spatial variable present in " +
                        print(e));
      case Op::Neg: {
        Info a = visit(e.child_a());
        a.sign = neg_sign(a.sign);
        a.range = Ival{-a.range.hi, -a.range.lo};
        return a;
      }
      case Op::Abs: {
        Info a = visit(e.child_a());
        Info r = a;
        r.range = range_of(e);
        r.sign = a.sign == Sign::Zero
                     ? Sign::Zero
                     : (strict_sign(a.sign) ? Sign::Positive : Sign::NonNegative);
        return r;
      }
      case Op::Add:
        return add_infos(visit(e.child_a()), visit(e.child_b()), range_of(e));
      case Op::Sub: {
        Info b = visit(e.child_b());
        b.sign = neg_sign(b.sign);
        b.range = Ival{-b.range.hi, -b.range.lo};
        return add_infos(visit(e.child_a()), b, range_of(e));
      }
      case Op::Mul:
        return mul_infos(visit(e.child_a()), visit(e.child_b()), range_of(e));
      case Op::Div:
        return mul_infos(visit(e.child_a()),
                         inverse_info(visit(e.child_b()),
                                      range_of(e.child_b())),
                         range_of(e));
      case Op::Exp: {
        Info u = visit(e.child_a());
        Ival range = range_of(e);
        if (u.range.bounded())
          return {0.0, 0.0, true, Sign::Positive, range};
        if (u.exact && u.lo < 0.0 && nonpos_sign(u.sign))
          return {kInf, kInf, true, Sign::Positive, range};
        if (u.exact && u.lo < 0.0 && nonneg_sign(u.sign))
          return {-kInf, -kInf, true, Sign::Positive, range};
        double lo = nonpos_sign(u.sign) ? 0.0 : -kInf;  // exp(u) <= 1
        return {lo, kInf, false, Sign::Positive, range};
      }
      case Op::Log: {
        Info u = visit(e.child_a());
        Ival range = range_of(e);
        if (u.range.bounded() && u.range.lo > 0.0)
          return {0.0, kInf, false, interval_sign(range), range};
        return unknown_info(range);
      }
      case Op::Sin:
      case Op::Cos: {
        visit(e.child_a());
        return {0.0, kInf, false, Sign::Unknown, Ival{-1.0, 1.0}};
      }
      case Op::Atan: {
        Info u = visit(e.child_a());
        Ival range = range_of(e);
        Sign s = u.sign;
        if (!strict_sign(s) && s != Sign::Zero) s = interval_sign(range);
        return {0.0, kInf, false, s, range};
      }
      case Op::Smoothstep: {
        Info u = visit(e.child_a());
        Ival range = range_of(e);
        if (u.range.hi <= 0.0) return make_zero_info();
        if (u.range.lo >= 1.0)
          return {0.0, 0.0, true, Sign::Positive, Ival::point(1.0)};
        return {0.0, kInf, false,
                range.lo > 0.0 ? Sign::Positive : Sign::NonNegative, range};
      }
      case Op::FlatExp: {
        Info u = visit(e.child_a());
        Ival range = range_of(e);
        if (u.range.hi <= 0.0) return make_zero_info();
        if (u.range.bounded() && u.range.lo > 0.0)
          return {0.0, 0.0, true, Sign::Positive, range};
        if (u.exact && u.sign == Sign::Positive && u.lo > 0.0)
          return {kInf, kInf, true, Sign::NonNegative, range};
        return {0.0, kInf, false, Sign::NonNegative, range};
      }
      case Op::Pow: {
        Info b = visit(e.child_a());
        Ival range = range_of(e);
        const Rational& q = e.value();
        double qd = q.to_double();
        if (q.is_integer()) {
          std::int64_t n = q.num();
          if (n == 0) return {0.0, 0.0, true, Sign::Positive, Ival::point(1.0)};
          Sign s = (n % 2 == 0)
                       ? (b.sign == Sign::Zero
                              ? Sign::Zero
                              : (strict_sign(b.sign) ? Sign::Positive
                                                     : Sign::NonNegative))
                       : b.sign;
          if (n > 0) {
            if (b.exact) return {qd * b.lo, qd * b.lo, true, s, range};
            return {qd * b.lo, qd * b.hi, false, s, range};
          }
          // Negative power needs a zero-free base.
          if (!strict_sign(interval_sign(b.range)) && !strict_sign(b.sign))
            return unknown_info(range);
          if (b.exact) return {qd * b.lo, qd * b.lo, true, s, range};
          return {-kInf, (-qd) * (-b.lo), false, s, range};
        }
        // Fractional exponent: base positive by the pow invariant.
        double lo, hi;
        if (qd > 0) {
          lo = qd * b.lo;
          hi = qd * b.hi;
        } else {
          lo = qd * b.hi;
          hi = qd * b.lo;
        }
        if (std::isnan(lo)) lo = -kInf;
        if (std::isnan(hi)) hi = kInf;
        return {lo, hi, b.exact, Sign::Positive, range};
      }
    }
    return unknown_info(Ival::whole());
  }
};

}  // namespace

Valuation symbolic_valuation(const Expr& eps_only, double eps_hi) {
  Analyzer a{eps_hi, {}};
  return a.visit(eps_only);
}

// ---------------------------------------------------------------------------
// EpsNet

EpsNet EpsNet::from_expr(const Expr& e, std::string label) {
  if (e.max_var() != 0)
    throw ExprError("EpsNet: expression has spatial variables: " + print(e));
  EpsNet net;
  net.sym = e;
  net.label = label.empty() ? print(e) : std::move(label);
  net.batch_ = std::make_shared<kernels::BatchEval>(e);
  auto batch = net.batch_;
  net.fn = [batch](double eps) {
    double out;
    batch->eval_eps(std::span<const double>(&eps, 1), &out);
    return out;
  };
  return net;
}

EpsNet EpsNet::from_fn(std::function<double(double)> f, std::string label) {
  EpsNet net;
  net.fn = std::move(f);
  net.label = std::move(label);
  return net;
}

std::vector<double> EpsNet::values(std::span<const double> eps) const {
  std::vector<double> out(eps.size());
  if (batch_) {
    batch_->eval_eps(eps, out.data());
    return out;
  }
  // Sweep-backed nets do independent grid slices; COLOMBEAU_LAB_THREADS caps
  // the workers. Results land by index, so the order is deterministic.
  const int cap = kernels::thread_cap();
  if (cap > 1 && eps.size() >= 8) {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < cap; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < eps.size();
             i = next.fetch_add(1))
          out[i] = fn(eps[i]);
      });
    }
    for (auto& th : pool) th.join();
    return out;
  }
  for (std::size_t i = 0; i < eps.size(); ++i) out[i] = fn(eps[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Order fitting and the moderateness / negligibility deciders

FitResult fit_order(const EpsNet& net, const EpsGrid& grid,
                    const AsymParams& params) {
  grid.validate();
  auto eps = grid.samples();
  auto vals = net.values(eps);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    double a = std::fabs(vals[i]);
    if (!std::isfinite(a) || a < params.fit_floor) continue;
    double x = std::log(eps[i]);
    double y = std::log(a);
    pts.emplace_back(x, y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 4)
    throw FitError("fit_order: fewer than 4 usable samples for " + net.label);
  double denom = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / denom;
  double icept = (sy - slope * sx) / n;
  double rss = 0;
  for (auto& [x, y] : pts) {
    double r = y - (icept + slope * x);
    rss += r * r;
  }
  return {slope, std::sqrt(rss / n), n};
}

namespace {

void attach_fit(Verdict& v, const EpsNet& net, const EpsGrid& grid,
                const AsymParams& params) {
  try {
    FitResult f = fit_order(net, grid, params);
    v.slope = f.slope;
    v.residual = f.residual;
  } catch (const FitError&) {
    // nets that vanish on the grid have no usable fit; fine
  }
}

std::string grid_note(const EpsGrid& g, const AsymParams& p) {
  return "grid ratio=" + fmt(g.ratio) + " k=" + std::to_string(g.k_min) + ".." +
         std::to_string(g.k_max) + " m_max=" + std::to_string(p.m_max) +
         " N_max=" + std::to_string(p.n_max) + " tail_slack=" +
         fmt(p.tail_slack);
}

}  // namespace

Verdict check_moderate(const EpsNet& net, const EpsGrid& grid,
                       const AsymParams& params) {
  grid.validate();
  if (net.sym) {
    Valuation val = symbolic_valuation(*net.sym, grid.largest());
    if (val.lo > -kInf) {
      Verdict v = Verdict::make_proven(
          "symbolic", "valuation lo=" + fmt(val.lo) + " > -inf, so |r| = O(eps^" +
                          fmt(val.lo) + " - delta)");
      attach_fit(v, net, grid, params);
      return v;
    }
    if (val.hi == -kInf) {
      Verdict v = Verdict::make_refuted(
          "symbolic", "valuation hi=-inf: grows faster than every power");
      auto eps = grid.samples();
      auto vals = net.values(eps);
      for (std::size_t i = 0; i < eps.size(); ++i) {
        double bound = scalar_ops::pow_int(eps[i], -params.n_max);
        if (!(std::fabs(vals[i]) <= bound * params.tail_slack)) {
          v.witnesses.push_back({eps[i], finite_or_cap(vals[i])});
          break;
        }
      }
      return v;
    }
  }
  auto eps = grid.samples();
  auto vals = net.values(eps);
  for (double x : vals) {
    if (std::isnan(x))
      return Verdict::make_undetermined("grid-eval-nan", false,
                                        "evaluation produced NaN on the grid");
  }
  const double decade_cut = 10.0 * grid.floor();
  for (int N = 0; N <= params.n_max; ++N) {
    bool ok = true;
    for (std::size_t i = 0; i < eps.size() && ok; ++i) {
      double bound = scalar_ops::pow_int(eps[i], -N);
      if (eps[i] <= decade_cut) bound *= params.tail_slack;
      ok = std::fabs(vals[i]) <= bound;
    }
    if (ok) {
      Verdict v = Verdict::make_undetermined(
          "grid-consistent", true,
          "|r(eps_k)| <= eps_k^-" + std::to_string(N) +
              " on the whole grid (slack x" + fmt(params.tail_slack) +
              " on the last decade); " + grid_note(grid, params));
      v.exponent = N;
      attach_fit(v, net, grid, params);
      return v;
    }
  }
  Verdict v = Verdict::make_refuted(
      "grid-witness",
      "no N <= " + std::to_string(params.n_max) + " bounds the net; " +
          grid_note(grid, params));
  std::size_t worst = 0;
  double worst_score = -kInf;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    double score = std::fabs(vals[i]) * scalar_ops::pow_int(eps[i], params.n_max);
    if (std::isinf(std::fabs(vals[i]))) score = kInf;
    if (score > worst_score) {
      worst_score = score;
      worst = i;
    }
  }
  v.witnesses.push_back({eps[worst], finite_or_cap(vals[worst])});
  attach_fit(v, net, grid, params);
  return v;
}

Verdict check_negligible(const EpsNet& net, const EpsGrid& grid,
                         const AsymParams& params) {
  grid.validate();
  if (net.sym) {
    Valuation val = symbolic_valuation(*net.sym, grid.largest());
    if (val.lo == kInf)
      return Verdict::make_proven(
          "symbolic", "valuation v=+inf: decays faster than every power");
    if (val.hi < kInf) {
      Verdict v = Verdict::make_refuted(
          "symbolic",
          "valuation hi=" + fmt(val.hi) + " < +inf: |r| is not O(eps^" +
              fmt(val.hi) + " + delta)");
      attach_fit(v, net, grid, params);
      return v;
    }
  }
  auto eps = grid.samples();
  auto vals = net.values(eps);
  for (double x : vals) {
    if (std::isnan(x))
      return Verdict::make_undetermined("grid-eval-nan", false,
                                        "evaluation produced NaN on the grid");
  }
  const double decade_cut = 10.0 * grid.floor();
  for (int m = 1; m <= params.m_max; ++m) {
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (eps[i] > decade_cut) continue;
      double bound = scalar_ops::pow_int(eps[i], m);
      if (!(std::fabs(vals[i]) <= bound)) {
        Verdict v = Verdict::make_refuted(
            "grid-witness", "|r(" + fmt(eps[i]) + ")| = " + fmt(vals[i]) +
                                " > eps^" + std::to_string(m) + "; " +
                                grid_note(grid, params));
        v.exponent = m;
        v.witnesses.push_back({eps[i], finite_or_cap(vals[i])});
        attach_fit(v, net, grid, params);
        return v;
      }
    }
  }
  Verdict v = Verdict::make_undetermined(
      "grid-consistent", true,
      "|r(eps_k)| <= eps_k^m for every m <= " + std::to_string(params.m_max) +
          " on the last decade; " + grid_note(grid, params));
  attach_fit(v, net, grid, params);
  return v;
}

}  // namespace clab
