#include "clab/gen_number.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace clab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}
}  // namespace

// ---------------------------------------------------------------------------
// EpsSubset

EpsSubset EpsSubset::whole_interval(const EpsGrid& grid) {
  EpsSubset s;
  double ratio = grid.ratio;
  int k_min = grid.k_min;
  s.sample = [ratio, k_min](int i) -> std::optional<double> {
    double v = scalar_ops::pow_int(ratio, k_min + i);
    if (v < 1e-300) return std::nullopt;
    return v;
  };
  s.member = [](double e) { return e > 0.0 && e <= 1.0; };
  s.label = "I";
  return s;
}

EpsSubset EpsSubset::from_samples(std::vector<double> samples) {
  if (samples.empty())
    throw std::invalid_argument("EpsSubset: empty sample list");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i] < samples[i - 1]))
      throw std::invalid_argument("EpsSubset: samples must strictly decrease");
  auto shared = std::make_shared<std::vector<double>>(std::move(samples));
  auto lookup = std::make_shared<std::set<double>>(shared->begin(), shared->end());
  EpsSubset s;
  s.sample = [shared](int i) -> std::optional<double> {
    if (i < 0 || static_cast<std::size_t>(i) >= shared->size())
      return std::nullopt;
    return (*shared)[static_cast<std::size_t>(i)];
  };
  s.member = [lookup](double e) { return lookup->count(e) > 0; };
  s.label = "samples[" + std::to_string(shared->size()) + "]";
  return s;
}

std::vector<double> EpsSubset::collect(double eps_floor, int max_count) const {
  std::vector<double> out;
  for (int i = 0; i < max_count; ++i) {
    auto v = sample(i);
    if (!v) {
      if (out.size() < 4)
        throw std::runtime_error(
            "EpsSubset '" + label + "': sampler exhausted before grid floor");
      return out;
    }
    if (!out.empty() && !(*v < out.back()))
      throw std::runtime_error("EpsSubset '" + label +
                               "': sampler not strictly decreasing");
    out.push_back(*v);
    if (*v <= eps_floor) break;
  }
  if (out.size() < 4)
    throw std::runtime_error("EpsSubset '" + label + "': too few samples");
  return out;
}

// ---------------------------------------------------------------------------
// GeneralizedNumber

GeneralizedNumber GeneralizedNumber::make(const Context& ctx, Expr rep) {
  Expr r = simplify(rep);
  if (r.max_var() != 0)
    throw std::invalid_argument("GeneralizedNumber: spatial variable in " +
                                print(r));
  GeneralizedNumber gn(r, EpsNet::from_expr(r));
  Verdict mod = check_moderate(gn.net_, ctx.grid, ctx.asym);
  if (mod.refuted())
    throw std::invalid_argument(
        "GeneralizedNumber: representative is not moderate (" + mod.rule +
        "): " + print(r));
  {
    std::lock_guard<std::mutex> lock(gn.cache_->mu);
    gn.cache_->moderate = mod;
  }
  return gn;
}

GeneralizedNumber GeneralizedNumber::make_guarded(const Context& ctx, Expr rep,
                                                  EpsNet net) {
  GeneralizedNumber gn(std::move(rep), std::move(net));
  Verdict mod = check_moderate(gn.net_, ctx.grid, ctx.asym);
  if (mod.refuted())
    throw std::invalid_argument(
        "GeneralizedNumber: guarded representative is not moderate");
  std::lock_guard<std::mutex> lock(gn.cache_->mu);
  gn.cache_->moderate = mod;
  return gn;
}

Verdict GeneralizedNumber::moderate(const Context& ctx) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->moderate)
    cache_->moderate = check_moderate(net_, ctx.grid, ctx.asym);
  return *cache_->moderate;
}

Verdict GeneralizedNumber::negligible(const Context& ctx) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->negligible)
    cache_->negligible = check_negligible(net_, ctx.grid, ctx.asym);
  return *cache_->negligible;
}

GN gn_add(const Context& ctx, const GN& a, const GN& b) {
  return GN::make(ctx, a.rep() + b.rep());
}
GN gn_sub(const Context& ctx, const GN& a, const GN& b) {
  return GN::make(ctx, a.rep() - b.rep());
}
GN gn_mul(const Context& ctx, const GN& a, const GN& b) {
  return GN::make(ctx, a.rep() * b.rep());
}
GN gn_scale(const Context& ctx, const GN& a, const Rational& c) {
  return GN::make(ctx, Expr::constant(c) * a.rep());
}

// ---------------------------------------------------------------------------
// Distributive normal form (exact, size-capped)

namespace {

constexpr std::size_t kExpandCap = 384;

struct PolyTerm {
  Rational coeff;
  Expr core;  // canonical multiplicative core; constant 1 for the scalar term
};

// Splits a canonical product into (rational coefficient, residual core).
std::pair<Rational, Expr> split_const(const Expr& e) {
  if (e.is_const()) return {e.value(), c_int(1)};
  if (e.op() == Op::Neg) {
    auto [c, core] = split_const(e.child_a());
    return {-c, core};
  }
  if (e.op() == Op::Mul && e.child_a().is_const())
    return {e.child_a().value(), e.child_b()};
  if (e.op() == Op::Mul && e.child_b().is_const())
    return {e.child_b().value(), e.child_a()};
  return {Rational(1), e};
}

void merge_term(std::vector<PolyTerm>& terms, Rational c, const Expr& core,
                bool& exact) {
  for (auto& t : terms) {
    if (equal(t.core, core)) {
      auto r = Rational::try_add(t.coeff, c);
      if (!r) {
        exact = false;
        return;
      }
      t.coeff = *r;
      return;
    }
  }
  terms.push_back({c, core});
}

std::optional<std::vector<PolyTerm>> to_terms(const Expr& e, int depth);

std::optional<std::vector<PolyTerm>> mul_terms(
    const std::vector<PolyTerm>& ta, const std::vector<PolyTerm>& tb) {
  if (ta.size() * tb.size() > kExpandCap) return std::nullopt;
  std::vector<PolyTerm> out;
  bool exact = true;
  for (const auto& x : ta) {
    for (const auto& y : tb) {
      auto c = Rational::try_mul(x.coeff, y.coeff);
      if (!c) return std::nullopt;
      Expr core = simplify(x.core * y.core);
      auto [extra, rest] = split_const(core);
      auto cc = Rational::try_mul(*c, extra);
      if (!cc) return std::nullopt;
      merge_term(out, *cc, rest, exact);
      if (!exact || out.size() > kExpandCap) return std::nullopt;
    }
  }
  return out;
}

std::optional<std::vector<PolyTerm>> to_terms(const Expr& e, int depth) {
  if (depth > 64) return std::nullopt;
  switch (e.op()) {
    case Op::Const:
      return std::vector<PolyTerm>{{e.value(), c_int(1)}};
    case Op::Neg: {
      auto t = to_terms(e.child_a(), depth + 1);
      if (!t) return std::nullopt;
      for (auto& x : *t) x.coeff = -x.coeff;
      return t;
    }
    case Op::Add:
    case Op::Sub: {
      auto ta = to_terms(e.child_a(), depth + 1);
      auto tb = to_terms(e.child_b(), depth + 1);
      if (!ta || !tb) return std::nullopt;
      bool exact = true;
      for (auto& y : *tb) {
        Rational c = e.op() == Op::Sub ? -y.coeff : y.coeff;
        merge_term(*ta, c, y.core, exact);
        if (!exact || ta->size() > kExpandCap) return std::nullopt;
      }
      return ta;
    }
    case Op::Mul: {
      auto ta = to_terms(e.child_a(), depth + 1);
      auto tb = to_terms(e.child_b(), depth + 1);
      if (!ta || !tb) return std::nullopt;
      return mul_terms(*ta, *tb);
    }
    case Op::Div: {
      auto ta = to_terms(e.child_a(), depth + 1);
      if (!ta) return std::nullopt;
      Expr inv = simplify(c_int(1) / e.child_b());
      std::vector<PolyTerm> tb{{Rational(1), inv}};
      auto [c, core] = split_const(inv);
      tb[0] = {c, core};
      return mul_terms(*ta, tb);
    }
    case Op::Pow: {
      const Rational& q = e.value();
      if (q.is_integer() && q.num() >= 2 && q.num() <= 6) {
        auto tb = to_terms(e.child_a(), depth + 1);
        if (tb && tb->size() > 1) {
          auto acc = tb;
          for (std::int64_t i = 1; i < q.num() && acc; ++i)
            acc = mul_terms(*acc, *tb);
          if (acc) return acc;
        }
      }
      auto [c, core] = split_const(e);
      return std::vector<PolyTerm>{{c, core}};
    }
    default: {
      auto [c, core] = split_const(e);
      return std::vector<PolyTerm>{{c, core}};
    }
  }
}

}  // namespace

bool normalizes_to_zero(const Expr& a, const Expr& b) {
  Expr diff = simplify(a - b);
  if (diff.is_const(Rational(0))) return true;
  auto terms = to_terms(diff, 0);
  if (!terms) return false;
  for (const auto& t : *terms)
    if (!t.coeff.is_zero()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Equality in the quotient

Verdict gn_eq(const Context& ctx, const GN& a, const GN& b) {
  Expr diff = simplify(a.rep() - b.rep());
  if (diff.is_const(Rational(0)))
    return Verdict::make_proven("symbolic-zero", "difference simplifies to 0");
  if (normalizes_to_zero(diff, c_int(0)))
    return Verdict::make_proven("polynomial-identity",
                                "difference expands to the zero polynomial");

  Valuation val = symbolic_valuation(diff, ctx.grid.largest());
  if (val.lo == kInf)
    return Verdict::make_proven("symbolic",
                                "difference has valuation +inf (negligible)");
  EpsNet dnet = EpsNet::from_expr(diff);
  if (val.hi < kInf) {
    Verdict v = Verdict::make_refuted(
        "symbolic", "difference valuation hi=" + fmt(val.hi) +
                        " < +inf: not negligible");
    auto eps = ctx.grid.samples();
    auto dv = dnet.values(eps);
    for (std::size_t i = eps.size(); i-- > 0;) {
      if (std::isfinite(dv[i]) && dv[i] != 0.0) {
        v.witnesses.push_back({eps[i], dv[i]});
        break;
      }
    }
    return v;
  }

  // Scale-relative floating-noise floor: differences below rounding noise of
  // the operands are numerically indistinguishable from zero.
  auto eps = ctx.grid.samples();
  auto dv = dnet.values(eps);
  auto va = a.net().values(eps);
  auto vb = b.net().values(eps);
  bool under_floor = true;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < eps.size() && under_floor; ++i) {
    double floor_i = ctx.asym.tol_eq * (std::fabs(va[i]) + std::fabs(vb[i]));
    if (std::fabs(dv[i]) > floor_i) under_floor = false;
    if (floor_i > 0.0)
      worst_ratio = std::max(worst_ratio, std::fabs(dv[i]) / floor_i);
  }
  if (under_floor) {
    return Verdict::make_proven(
        "grid-identity", "max |a-b| within " + fmt(ctx.asym.tol_eq) +
                             "*(|a|+|b|) floating-noise floor on the grid");
  }

  Verdict neg = check_negligible(dnet, ctx.grid, ctx.asym);
  if (neg.proven()) return neg;
  if (neg.refuted()) {
    neg.trace.push_back("difference of representatives is not negligible");
    return neg;
  }
  return Verdict::make_undetermined(
      "grid-consistent", neg.consistent,
      "difference consistent with negligible on the tested grid");
}

// ---------------------------------------------------------------------------
// Strict non-vanishing on S

NonzeroResult strictly_nonzero_on(const Context& ctx, const EpsNet& net,
                                  const EpsSubset& S) {
  const double floor = ctx.witness_grid().floor();
  auto samples = S.collect(floor);
  auto vals = net.values(samples);
  const std::size_t n = samples.size();

  std::optional<Valuation> val;
  if (net.sym) val = symbolic_valuation(*net.sym, ctx.grid.largest());

  if (val && val->exact && val->lo == kInf) {
    Verdict v = Verdict::make_refuted(
        "symbolic", "net is negligible; never strictly non-zero on any S");
    return {v, std::nullopt, 1.0};
  }

  for (int m = 1; m <= ctx.asym.m_max; ++m) {
    for (std::size_t drop = 0; drop <= n / 4; ++drop) {
      bool ok = true;
      for (std::size_t i = drop; i < n && ok; ++i)
        ok = std::fabs(vals[i]) > scalar_ops::pow_int(samples[i], m);
      if (!ok) continue;
      const bool proven = val && val->exact && std::isfinite(val->lo) &&
                          val->lo < static_cast<double>(m) &&
                          (val->sign == Sign::Positive ||
                           val->sign == Sign::Negative);
      Verdict v =
          proven ? Verdict::make_proven(
                       "symbolic+grid",
                       "|r| ~ eps^" + fmt(val->lo) + " two-sided, so |r| > eps^" +
                           std::to_string(m) + " for small eps")
                 : Verdict::make_undetermined(
                       "grid-consistent", true,
                       "|r(eps)| > eps^" + std::to_string(m) + " at all " +
                           std::to_string(n - drop) + " sampled S-points");
      v.exponent = m;
      return {v, m, drop == 0 ? 1.0 : samples[drop]};
    }
  }

  // Refutation needs a margin-2 violation for every candidate m on the tail.
  const std::size_t tail_begin = (3 * n) / 4;
  bool all_m_violated = true;
  Witness witness{};
  for (int m = 1; m <= ctx.asym.m_max && all_m_violated; ++m) {
    bool found = false;
    for (std::size_t i = tail_begin; i < n && !found; ++i) {
      if (std::fabs(vals[i]) <=
          scalar_ops::pow_int(samples[i], m) / ctx.asym.refute_margin) {
        found = true;
        if (m == 1) witness = {samples[i], vals[i]};
      }
    }
    all_m_violated = found;
  }
  if (all_m_violated) {
    Verdict v = Verdict::make_refuted(
        "grid-witness",
        "every m <= " + std::to_string(ctx.asym.m_max) +
            " has a tail S-sample with |r| <= eps^m/2");
    v.witnesses.push_back(witness);
    return {v, std::nullopt, 1.0};
  }
  Verdict v = Verdict::make_undetermined(
      "inconclusive", false,
      "no exponent certified and no uniform refutation on the sampled tail");
  return {v, std::nullopt, 1.0};
}

// ---------------------------------------------------------------------------
// The S-inverse construction

SInverseResult s_inverse(const Context& ctx, const GN& r, const EpsSubset& S) {
  return s_inverse_net(ctx, r.rep(), S);
}

SInverseResult s_inverse_net(const Context& ctx, const Expr& rep,
                             const EpsSubset& S) {
  EpsNet net = EpsNet::from_expr(simplify(rep));
  NonzeroResult nz = strictly_nonzero_on(ctx, net, S);
  if (nz.verdict.refuted() || !nz.exponent)
    throw std::invalid_argument(
        "s_inverse: r is not strictly non-zero on S (" + nz.verdict.rule + ")");
  const int m = *nz.exponent;

  // chi = smoothstep((|r| - eps^(m+1)) / (eps^m - eps^(m+1))): identically 1
  // where |r| >= eps^m, identically 0 where |r| <= eps^(m+1).
  Expr abs_r = Expr::unary(Op::Abs, rep);
  Expr band_lo = eps_pow(Rational(m + 1));
  Expr band_hi = eps_pow(Rational(m));
  Expr chi = smoothstep((abs_r - band_lo) / (band_hi - band_lo));
  Expr s_rep = chi / rep;

  // Total evaluation: s is 0 by definition where chi vanishes; the closed
  // form is 0/0 exactly at zeros of r, all of which lie in that region.
  EpsNet rnet = net;
  EpsNet s_net = EpsNet::from_fn(
      [rnet, m](double e) {
        double rv = rnet.fn(e);
        double p_lo = scalar_ops::pow_int(e, m + 1);
        if (std::fabs(rv) <= p_lo) return 0.0;
        double p_hi = scalar_ops::pow_int(e, m);
        double chi_v =
            scalar_ops::smoothstep_val((std::fabs(rv) - p_lo) / (p_hi - p_lo));
        return chi_v / rv;
      },
      "chi/r");

  GN s = GN::make_guarded(ctx, s_rep, s_net);
  GN rprime = GN::make(ctx, chi);

  Verdict contract = Verdict::make_proven(
      "construction", "r*s = chi identically; chi = 1 where |r| >= eps^" +
                          std::to_string(m));
  contract.exponent = m;

  // r|S = 1 at the sampled level: rprime - 1 must be 0 (up to eps^m_max) at
  // the certified S tail.
  auto samples = S.collect(ctx.witness_grid().floor());
  int checked = 0;
  for (double e : samples) {
    if (e > nz.tail_start) continue;
    if (checked >= 30) break;
    ++checked;
    double rp = rprime.net().fn(e);
    double bound = scalar_ops::pow_int(e, ctx.asym.m_max);
    if (!(std::fabs(rp - 1.0) <= bound)) {
      contract = Verdict::make_refuted(
          "contract", "rprime(" + fmt(e) + ") - 1 = " + fmt(rp - 1.0) +
                          " exceeds eps^m_max");
      break;
    }
  }
  contract.trace.push_back("rprime-1 checked at " + std::to_string(checked) +
                           " S-samples");

  // Moderateness envelope of s.
  if (contract.proven()) {
    for (double e : ctx.grid.samples()) {
      double sv = std::fabs(s.net().fn(e));
      double env = scalar_ops::pow_int(e, -(m + 1)) * (1.0 + 1e-9);
      if (!(sv <= env)) {
        contract = Verdict::make_refuted(
            "contract", "|s(" + fmt(e) + ")| = " + fmt(sv) +
                            " exceeds eps^-(m+1) envelope");
        break;
      }
    }
  }
  return {std::move(s), std::move(rprime), m, std::move(contract)};
}

// ---------------------------------------------------------------------------
// Witness subsets (the Proposition, constructive direction)

WitnessSResult witness_S(const Context& ctx, const EpsNet& net) {
  Verdict neg = check_negligible(net, ctx.grid, ctx.asym);
  if (neg.proven()) return {neg, std::nullopt, std::nullopt};
  if (!neg.refuted()) {
    // Undetermined stays undetermined; no fabricated S.
    return {neg, std::nullopt, std::nullopt};
  }

  EpsGrid wg = ctx.witness_grid();
  auto eps = wg.samples();
  auto vals = net.values(eps);
  for (int M = 1; M <= ctx.asym.m_max; ++M) {
    std::vector<double> hits;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      // overflow to +inf certainly clears the bound; only NaN is unusable
      if (!std::isnan(vals[i]) &&
          std::fabs(vals[i]) > scalar_ops::pow_int(eps[i], M))
        hits.push_back(eps[i]);
    }
    if (hits.size() >= 30 && hits.back() <= 1e3 * wg.floor()) {
      auto S = EpsSubset::from_samples(std::move(hits));
      S.label = "witness(M=" + std::to_string(M) + ")";
      return {neg, S, M};
    }
  }
  // Refuted negligibility but witnesses too sparse on this grid.
  Verdict v = Verdict::make_undetermined(
      "witness-sparse", false,
      "negligibility refuted but fewer than 30 witness samples up to the "
      "witness grid floor");
  return {v, std::nullopt, std::nullopt};
}

// ---------------------------------------------------------------------------
// Idempotent audit

Verdict idempotent_audit(const Context& ctx, const GN& r) {
  GN r2 = gn_mul(ctx, r, r);
  Verdict idem = gn_eq(ctx, r2, r);
  if (idem.refuted()) {
    return Verdict::make_undetermined(
        "not-applicable", false,
        "precondition r^2 = r fails (" + idem.rule + "); audit not applicable");
  }
  GN zero = GN::make(ctx, c_int(0));
  GN one = GN::make(ctx, c_int(1));
  Verdict eq0 = gn_eq(ctx, r, zero);
  if (eq0.not_refuted()) {
    Verdict v = Verdict::make_proven("audit", "idempotent r is equal to 0");
    v.consistent = eq0.proven();
    return v;
  }
  Verdict eq1 = gn_eq(ctx, r, one);
  if (eq1.not_refuted()) {
    Verdict v = Verdict::make_proven("audit", "idempotent r is equal to 1");
    v.consistent = eq1.proven();
    return v;
  }
  Verdict alarm = Verdict::make_refuted(
      "alarm",
      "nontrivial idempotent detected: r^2 = r but r is neither 0 nor 1; "
      "this contradicts the smooth-parametrization setting");
  alarm.witnesses = eq1.witnesses;
  return alarm;
}

}  // namespace clab
