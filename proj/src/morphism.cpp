#include "clab/morphism.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace clab {

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Expr projection(int i) { return Expr::var(i); }
}  // namespace

// ---------------------------------------------------------------------------
// c-boundedness

Verdict check_c_bounded(const Context& ctx, const DomainSpec& source,
                        const DomainSpec& target, std::span<const GF> comps) {
  if (static_cast<int>(comps.size()) != target.dim)
    throw std::invalid_argument("check_c_bounded: component/target mismatch");
  const double eps0 = ctx.grid.largest();
  bool all_symbolic = true;

  for (const auto& [j, k] : source.exhaustion()) {
    // Bounded-fragment route: interval ranges over K_j and the eps germ.
    bool symbolic_j = true;
    Box range;
    for (const auto& c : comps) {
      std::vector<Ival> boxes;
      for (int d = 0; d < source.dim; ++d) {
        std::size_t u = static_cast<std::size_t>(d);
        boxes.push_back({k.lo[u], k.hi[u]});
      }
      Ival r = c.has_override()
                   ? Ival::whole()
                   : eval_interval(c.rep(), eps_germ(eps0), boxes);
      if (!r.bounded()) {
        symbolic_j = false;
        break;
      }
      range.lo.push_back(r.lo);
      range.hi.push_back(r.hi);
    }
    if (symbolic_j && target.strictly_contains(range, 1e-9)) continue;
    all_symbolic = false;

    // Sampled route: image hull over the lattice and the eps tail.
    Lattice lat = make_lattice(k, lattice_intervals_for(ctx, source.dim),
                               source.shape == DomainSpec::Shape::Ball
                                   ? &source : nullptr);
    Box hull;
    hull.lo.assign(comps.size(), std::numeric_limits<double>::infinity());
    hull.hi.assign(comps.size(), -std::numeric_limits<double>::infinity());
    std::vector<double> out(lat.size);
    std::vector<std::optional<kernels::BatchEval>> batches(comps.size());
    for (std::size_t ci = 0; ci < comps.size(); ++ci)
      if (!comps[ci].has_override()) batches[ci].emplace(comps[ci].rep());
    for (double e : ctx.grid.samples()) {
      if (e > eps0) continue;
      for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        if (comps[ci].has_override()) {
          std::vector<double> pt(lat.coords.size());
          for (std::size_t p = 0; p < lat.size; ++p) {
            for (std::size_t d = 0; d < lat.coords.size(); ++d)
              pt[d] = lat.coords[d][p];
            out[p] = comps[ci].value(e, pt);
          }
        } else {
          batches[ci]->eval_lattice(e, lat.coords, lat.size, out.data());
        }
        for (double v : out) {
          if (!std::isfinite(v)) {
            Verdict bad = Verdict::make_refuted(
                "grid-witness", "image not finite on K_" + std::to_string(j));
            bad.witnesses.push_back({e, v});
            return bad;
          }
          hull.lo[ci] = std::min(hull.lo[ci], v);
          hull.hi[ci] = std::max(hull.hi[ci], v);
        }
      }
    }
    if (!target.strictly_contains(hull, 1e-12)) {
      Verdict bad = Verdict::make_refuted(
          "grid-witness",
          "sampled image of K_" + std::to_string(j) +
              " is not compactly inside the target domain");
      for (std::size_t ci = 0; ci < comps.size(); ++ci)
        bad.trace.push_back("component " + std::to_string(ci + 1) +
                            " image hull [" + fmt(hull.lo[ci]) + ", " +
                            fmt(hull.hi[ci]) + "]");
      return bad;
    }
  }
  if (all_symbolic)
    return Verdict::make_proven(
        "symbolic", "bounded-fragment image ranges are compact in the target");
  return Verdict::make_undetermined(
      "grid-consistent", true,
      "sampled image hulls compact in the target for every K_j");
}

CBoundedMap CBoundedMap::make(const Context& ctx, DomainSpec source,
                              DomainSpec target, std::vector<Expr> comps) {
  CBoundedMap m;
  m.source = std::move(source);
  m.target = std::move(target);
  for (auto& c : comps) m.comps.push_back(GF::make(ctx, m.source, c));
  m.c_bounded = check_c_bounded(ctx, m.source, m.target, m.comps);
  if (m.c_bounded.refuted())
    throw std::invalid_argument("CBoundedMap: c-boundedness refuted (" +
                                m.c_bounded.rule + ")");
  return m;
}

CBoundedMap CBoundedMap::from_json(const Context& ctx,
                                   const nlohmann::json& j) {
  std::vector<Expr> comps;
  for (const auto& s : j.at("components"))
    comps.push_back(parse(s.get<std::string>()));
  return make(ctx, DomainSpec::from_json(j.at("source")),
              DomainSpec::from_json(j.at("target")), std::move(comps));
}

nlohmann::json CBoundedMap::to_json() const {
  nlohmann::json j;
  j["source"] = source.to_json();
  j["target"] = target.to_json();
  j["components"] = nlohmann::json::array();
  for (const auto& c : comps) j["components"].push_back(print(c.rep()));
  return j;
}

// ---------------------------------------------------------------------------
// Pullback and audits

AlgebraMorphism pullback(const Context& ctx, const CBoundedMap& phi) {
  std::vector<Expr> subs;
  for (const auto& c : phi.comps) subs.push_back(c.rep());
  DomainSpec target_alg = phi.source;
  AlgebraMorphism Phi;
  Phi.domain_x = phi.target;
  Phi.domain_y = phi.source;
  Phi.unit_flag = true;
  Phi.label = "pullback";
  Context ctx_copy = ctx;
  Phi.act = [subs, target_alg, ctx_copy](const GF& u) {
    if (u.has_override())
      throw std::invalid_argument(
          "pullback: closed-form representative required");
    Expr composed = substitute_vars(u.rep(), subs);
    return GF::make(ctx_copy, target_alg, composed);
  };
  return Phi;
}

std::vector<GF> probe_corpus(const Context& ctx, const DomainSpec& omega_x,
                             int count) {
  // Fixed generator: the audit corpus is versioned (probe-corpus-v1), not
  // tied to the CLI seed.
  std::mt19937_64 rng(0xC0FFEE);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<GF> out;
  Box b = omega_x.bounding();
  for (int i = 0; i < count; ++i) {
    Expr acc = c_int(1);
    for (int d = 1; d <= omega_x.dim; ++d) {
      std::size_t u = static_cast<std::size_t>(d - 1);
      // Affine rescale of the coordinate to keep polynomials tame on the box.
      double mid = 0.5 * (b.lo[u] + b.hi[u]);
      double half = 0.5 * (b.hi[u] - b.lo[u]);
      Expr t = (Expr::var(d) - const_from_double(mid)) *
               const_from_double(1.0 / half);
      int shape = static_cast<int>(rng() % 4);
      Expr piece = t;
      if (shape == 1) piece = Expr::unary(Op::Sin, t * c_int(2));
      if (shape == 2) piece = Expr::unary(Op::Cos, t) + const_from_double(0.25 * unit(rng));
      if (shape == 3) piece = Expr::pow(t, Rational(2));
      acc = acc * (piece + const_from_double(1.5 + 0.5 * unit(rng)));
    }
    int eps_shape = i % 3;
    if (eps_shape == 1) acc = acc * Expr::eps();
    if (eps_shape == 2) acc = acc + eps_pow(Rational(2));
    out.push_back(GF::make(ctx, omega_x, acc));
  }
  return out;
}

Verdict audit_morphism(const Context& ctx, const AlgebraMorphism& Phi,
                       int pairs) {
  GF one = embed_smooth(ctx, c_int(1), Phi.domain_x);
  GF one_y = embed_smooth(ctx, c_int(1), Phi.domain_y);
  Verdict unit = gf_eq(ctx, Phi.act(one), one_y);
  if (unit.refuted())
    return Verdict::make_refuted("audit:unit",
                                 "Phi(1) != 1 (probe corpus v1)");
  auto corpus = probe_corpus(ctx, Phi.domain_x, 2 * pairs);
  bool all_proven = true;
  for (int i = 0; i + 1 < static_cast<int>(corpus.size()); i += 2) {
    const GF& u = corpus[static_cast<std::size_t>(i)];
    const GF& v = corpus[static_cast<std::size_t>(i + 1)];
    Verdict additive =
        gf_eq(ctx, Phi.act(gf_add(ctx, u, v)),
              gf_add(ctx, Phi.act(u), Phi.act(v)));
    if (additive.refuted()) {
      additive.trace.push_back("additivity failed on probe pair " +
                               std::to_string(i / 2));
      additive.rule = "audit:linearity";
      return additive;
    }
    Verdict multiplicative =
        gf_eq(ctx, Phi.act(gf_mul(ctx, u, v)),
              gf_mul(ctx, Phi.act(u), Phi.act(v)));
    if (multiplicative.refuted()) {
      multiplicative.trace.push_back("multiplicativity failed on probe pair " +
                                     std::to_string(i / 2));
      multiplicative.rule = "audit:multiplicativity";
      return multiplicative;
    }
    all_proven = all_proven && additive.proven() && multiplicative.proven() &&
                 unit.proven();
  }
  std::string note = "unit + " + std::to_string(pairs) +
                     " probe pairs (corpus probe-corpus-v1)";
  return all_proven ? Verdict::make_proven("audit", note)
                    : Verdict::make_undetermined("audit", true, note);
}

RecoveredMap recover_map(const Context& ctx, const AlgebraMorphism& Phi) {
  Verdict audit = audit_morphism(ctx, Phi);
  if (audit.refuted())
    throw std::invalid_argument("recover_map: morphism audit failed (" +
                                audit.rule + ")");
  std::vector<GF> comps;
  for (int i = 1; i <= Phi.domain_x.dim; ++i)
    comps.push_back(Phi.act(embed_smooth(ctx, projection(i), Phi.domain_x)));
  Verdict cb = check_c_bounded(ctx, Phi.domain_y, Phi.domain_x, comps);
  CBoundedMap map;
  map.source = Phi.domain_y;
  map.target = Phi.domain_x;
  map.comps = std::move(comps);
  map.c_bounded = cb;
  if (cb.refuted()) {
    // The smooth-parametrization setting promises a c-bounded recovery;
    // surface the contradiction, do not fall back.
    cb.trace.push_back(
        "alarm: recovered components are not c-bounded into the target");
  }
  return {std::move(map), std::move(audit), std::move(cb)};
}

FactorizationReport verify_factorization(const Context& ctx,
                                         const AlgebraMorphism& Phi,
                                         const CBoundedMap& phi,
                                         std::span<const GF> corpus) {
  AlgebraMorphism pb = pullback(ctx, phi);
  FactorizationReport report;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Verdict v = gf_eq(ctx, Phi.act(corpus[i]), pb.act(corpus[i]));
    report.all_passed = report.all_passed && !v.refuted();
    report.rows.push_back({"corpus[" + std::to_string(i) + "]", std::move(v)});
  }
  return report;
}

CBoundedMap compose_maps(const Context& ctx, const CBoundedMap& phi,
                         const CBoundedMap& psi) {
  if (!psi.target.same_as(phi.source))
    throw std::invalid_argument("compose_maps: domain mismatch (psi target "
                                "vs phi source)");
  std::vector<Expr> subs;
  for (const auto& c : psi.comps) subs.push_back(c.rep());
  std::vector<Expr> comps;
  for (const auto& c : phi.comps)
    comps.push_back(substitute_vars(c.rep(), subs));
  return CBoundedMap::make(ctx, psi.source, phi.target, std::move(comps));
}

IsomorphismReport verify_isomorphism(const Context& ctx,
                                     const AlgebraMorphism& Phi,
                                     const AlgebraMorphism& Phi_inv) {
  IsomorphismReport rep;
  rep.dim_x = Phi.domain_x.dim;
  rep.dim_y = Phi.domain_y.dim;

  RecoveredMap fwd = recover_map(ctx, Phi);      // phi: Y -> X
  RecoveredMap bwd = recover_map(ctx, Phi_inv);  // phi': X -> Y
  rep.audit_fwd = fwd.audit;
  rep.audit_inv = bwd.audit;

  CBoundedMap round_x = compose_maps(ctx, fwd.map, bwd.map);  // X -> X
  CBoundedMap round_y = compose_maps(ctx, bwd.map, fwd.map);  // Y -> Y

  bool all_proven = true;
  auto check_identity = [&](const CBoundedMap& round, const DomainSpec& dom) {
    for (int i = 1; i <= dom.dim; ++i) {
      Verdict v = gf_eq(ctx, round.comps[static_cast<std::size_t>(i - 1)],
                        embed_smooth(ctx, projection(i), dom));
      all_proven = all_proven && v.proven();
      if (v.refuted()) all_proven = false;
      rep.identity_checks.push_back(std::move(v));
    }
  };
  check_identity(round_x, Phi.domain_x);
  check_identity(round_y, Phi.domain_y);

  bool refuted = std::any_of(rep.identity_checks.begin(),
                             rep.identity_checks.end(),
                             [](const Verdict& v) { return v.refuted(); });
  if (refuted) {
    rep.verdict = Verdict::make_refuted(
        "iso", "composition with the candidate inverse is not the identity");
    return rep;
  }
  if (rep.dim_x != rep.dim_y) {
    // Two-sided inverse verified yet dimensions differ: impossible in the
    // correspondence; treat as a hard alarm.
    throw std::logic_error(
        "verify_isomorphism: two-sided inverse verified but dim X != dim Y");
  }
  rep.verdict =
      all_proven
          ? Verdict::make_proven(
                "iso", "two-sided identity round-trip proven; dim X = dim Y = " +
                           std::to_string(rep.dim_x))
          : Verdict::make_undetermined(
                "iso", true,
                "round-trip consistent with the identity on the tested grid");
  return rep;
}

}  // namespace clab
