#include "clab/functional.hpp"

#include <cmath>

namespace clab {

Functional evaluation_functional(const Context& ctx,
                                 const GeneralizedPoint& x,
                                 DomainSpec domain) {
  if (x.dim() != domain.dim)
    throw std::invalid_argument("evaluation_functional: dimension mismatch");
  if (!domain.strictly_contains(x.support, 1e-12))
    throw std::invalid_argument(
        "evaluation_functional: point support leaves the domain");
  Functional nu;
  nu.domain = domain;
  nu.label = "ev";
  Context ctx_copy = ctx;
  GeneralizedPoint xc = x;
  nu.act = [ctx_copy, xc](const GF& u) { return eval_at(ctx_copy, u, xc); };
  return nu;
}

Verdict audit_functional(const Context& ctx, const Functional& nu,
                         int pairs) {
  GF one = embed_smooth(ctx, c_int(1), nu.domain);
  GN nu_one = nu.act(one);
  Verdict unit = gn_eq(ctx, nu_one, GN::make(ctx, c_int(1)));
  if (unit.refuted()) {
    unit.rule = "audit:unit";
    unit.trace.push_back("nu(1) != 1");
    return unit;
  }
  auto corpus = probe_corpus(ctx, nu.domain, 2 * pairs);
  bool all_proven = unit.proven();
  for (int i = 0; i + 1 < static_cast<int>(corpus.size()); i += 2) {
    const GF& u = corpus[static_cast<std::size_t>(i)];
    const GF& v = corpus[static_cast<std::size_t>(i + 1)];
    Verdict lin = gn_eq(ctx, nu.act(gf_add(ctx, u, v)),
                        gn_add(ctx, nu.act(u), nu.act(v)));
    if (lin.refuted()) {
      lin.rule = "audit:linearity";
      lin.trace.push_back("additivity failed on probe pair " +
                          std::to_string(i / 2));
      return lin;
    }
    Verdict mul = gn_eq(ctx, nu.act(gf_mul(ctx, u, v)),
                        gn_mul(ctx, nu.act(u), nu.act(v)));
    if (mul.refuted()) {
      mul.rule = "audit:multiplicativity";
      mul.trace.push_back("multiplicativity failed on probe pair " +
                          std::to_string(i / 2));
      return mul;
    }
    all_proven = all_proven && lin.proven() && mul.proven();
  }
  std::string note =
      "unit + " + std::to_string(pairs) + " probe pairs (probe-corpus-v1)";
  return all_proven ? Verdict::make_proven("audit", note)
                    : Verdict::make_undetermined("audit", true, note);
}

RecoveredPoint recover_point(const Context& ctx, const Functional& nu) {
  Verdict audit = audit_functional(ctx, nu);
  if (audit.refuted())
    throw std::invalid_argument("recover_point: functional audit failed (" +
                                audit.rule + "): " +
                                (audit.trace.empty() ? "" : audit.trace.back()));

  GeneralizedPoint pt;
  for (int i = 1; i <= nu.domain.dim; ++i) {
    GN xi = nu.act(embed_smooth(ctx, Expr::var(i), nu.domain));
    pt.comps.push_back(xi.rep());
  }
  // Declared support: bounded-fragment ranges when available, else the
  // sampled hull, clipped into the open domain.
  Box bounding = nu.domain.bounding();
  auto eps = ctx.grid.samples();
  for (int i = 0; i < nu.domain.dim; ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    Ival r = eval_interval(pt.comps[u], eps_germ(ctx.grid.largest()), {});
    double lo, hi;
    if (r.bounded()) {
      lo = r.lo;
      hi = r.hi;
    } else {
      auto vals = EpsNet::from_expr(pt.comps[u]).values(eps);
      lo = *std::min_element(vals.begin(), vals.end());
      hi = *std::max_element(vals.begin(), vals.end());
    }
    double margin = 1e-6 * (1.0 + hi - lo);
    pt.support.lo.push_back(std::max(lo - margin, bounding.lo[u] + 1e-9));
    pt.support.hi.push_back(std::min(hi + margin, bounding.hi[u] - 1e-9));
  }

  // Verification: nu agrees with evaluation at the recovered point.
  auto corpus = probe_corpus(ctx, nu.domain, 10);
  bool all_proven = true;
  Verdict verification = Verdict::make_proven(
      "verification", "nu(u) = u(x~) over the verification corpus");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Verdict v = gn_eq(ctx, nu.act(corpus[i]), eval_at(ctx, corpus[i], pt));
    if (v.refuted()) {
      v.trace.push_back("nu(u) != u(x~) at corpus[" + std::to_string(i) + "]");
      verification = v;
      all_proven = false;
      break;
    }
    all_proven = all_proven && v.proven();
  }
  if (!verification.refuted() && !all_proven)
    verification = Verdict::make_undetermined(
        "verification", true, "agreement consistent on the tested grid");
  return {std::move(pt), std::move(audit), std::move(verification)};
}

}  // namespace clab
