#include <doctest.h>

#include <cmath>

#include "clab/corpus.hpp"

using namespace clab;

namespace {
Context ctx;
}

TEST_CASE("c-boundedness verdicts") {
  auto oy = DomainSpec::box({-2}, {2});
  auto ox = DomainSpec::box({-3}, {3});
  auto affine = CBoundedMap::make(ctx, oy, ox, {parse("(+ x1 eps)")});
  CHECK(affine.c_bounded.proven());

  CHECK_THROWS_AS(CBoundedMap::make(ctx, oy, ox, {parse("(/ x1 eps)")}),
                  std::invalid_argument);

  auto osc = CBoundedMap::make(ctx, oy, ox, {parse("(sin (/ x1 eps))")});
  CHECK(osc.c_bounded.proven());
}

TEST_CASE("pullback is structurally multiplicative and unital") {
  auto oy = DomainSpec::box({-2}, {2});
  auto ox = DomainSpec::box({-3}, {3});
  auto phi = CBoundedMap::make(ctx, oy, ox, {parse("(+ x1 eps)")});
  AlgebraMorphism Phi = pullback(ctx, phi);
  CHECK(Phi.unit_flag);
  GF one = embed_smooth(ctx, c_int(1), ox);
  CHECK(equal(Phi.act(one).rep(), c_int(1)));

  // structural property, probed on 100 random pairs anyway
  std::mt19937_64 rng(6);
  auto reps = corpus::random_gf_reps(rng, 200);
  int pairs = 0;
  for (std::size_t i = 0; i + 1 < reps.size() && pairs < 100; i += 2, ++pairs) {
    GF u = GF::make(ctx, ox, reps[i]);
    GF v = GF::make(ctx, ox, reps[i + 1]);
    Verdict mult = gf_eq(ctx, Phi.act(gf_mul(ctx, u, v)),
                         gf_mul(ctx, Phi.act(u), Phi.act(v)));
    CHECK(mult.proven());
  }
  CHECK(pairs == 100);
  CHECK(audit_morphism(ctx, Phi).not_refuted());
}

TEST_CASE("recover_map round-trips pullbacks") {
  std::mt19937_64 rng(3);
  auto fixtures = corpus::map_fixtures(ctx, rng);
  int tested = 0;
  for (const auto& fx : fixtures) {
    if (tested >= 10) break;
    AlgebraMorphism Phi = pullback(ctx, fx.phi);
    auto rec = recover_map(ctx, Phi);
    CHECK(rec.audit.not_refuted());
    CHECK(rec.c_bounded.not_refuted());
    for (std::size_t i = 0; i < fx.phi.comps.size(); ++i) {
      Verdict v = gf_eq(ctx, rec.map.comps[i], fx.phi.comps[i]);
      CHECK_MESSAGE(v.proven(), fx.name);
    }
    ++tested;
  }
}

TEST_CASE("factorization report distinguishes exact / negligible / different") {
  auto oy = DomainSpec::box({-2}, {2});
  auto ox = DomainSpec::box({-3}, {3});
  auto phi = CBoundedMap::make(ctx, oy, ox, {parse("(+ x1 eps)")});
  AlgebraMorphism Phi = pullback(ctx, phi);
  auto corpus_x = probe_corpus(ctx, ox, 6);

  auto exact = verify_factorization(ctx, Phi, phi, corpus_x);
  CHECK(exact.all_passed);

  auto negl = CBoundedMap::make(
      ctx, oy, ox, {parse("(+ (+ x1 eps) (exp (neg (/ 1 eps))))")});
  auto near = verify_factorization(ctx, Phi, negl, corpus_x);
  CHECK(near.all_passed);

  auto shifted = CBoundedMap::make(ctx, oy, ox, {parse("(+ x1 (* 2 eps))")});
  auto off = verify_factorization(ctx, Phi, shifted, corpus_x);
  CHECK(!off.all_passed);
}

TEST_CASE("composition of maps") {
  auto oz = DomainSpec::box({-1.5}, {1.5});
  auto oy = DomainSpec::box({-2}, {2});
  auto ox = DomainSpec::box({-3}, {3});
  auto phi = CBoundedMap::make(ctx, oy, ox, {parse("(+ x1 eps)")});
  auto psi = CBoundedMap::make(ctx, oz, oy, {parse("(- x1 eps)")});
  auto comp = compose_maps(ctx, phi, psi);
  CHECK(equal(comp.comps[0].rep(), Expr::var(1)));

  // shifts compose additively
  auto s1 = CBoundedMap::make(ctx, oz, oy, {parse("(+ x1 1/4)")});
  auto s2 = CBoundedMap::make(ctx, oy, ox, {parse("(+ x1 1/2)")});
  auto s = compose_maps(ctx, s2, s1);
  CHECK(equal(simplify(s.comps[0].rep()), simplify(parse("(+ x1 3/4)"))));
}

TEST_CASE("isomorphism verification on the invertible fixtures") {
  std::mt19937_64 rng(3);
  auto fixtures = corpus::map_fixtures(ctx, rng);
  int count = 0;
  for (const auto& fx : fixtures) {
    if (!fx.inverse) continue;
    auto report = verify_isomorphism(ctx, pullback(ctx, fx.phi),
                                     pullback(ctx, *fx.inverse));
    CHECK_MESSAGE(report.verdict.proven(), fx.name);
    CHECK(report.dim_x == report.dim_y);
    ++count;
  }
  CHECK(count >= 5);
}

TEST_CASE("wrong inverses are refuted") {
  auto oy = DomainSpec::box({-1}, {1});
  auto ox = DomainSpec::box({-1}, {1});
  // y^2 is not injective on (-1,1); pair it with a wrong candidate inverse
  auto sq = CBoundedMap::make(ctx, oy, ox, {parse("(pow x1 2)")});
  auto wrong = CBoundedMap::make(ctx, ox, oy, {parse("(* 9/10 x1)")});
  auto report = verify_isomorphism(ctx, pullback(ctx, sq),
                                   pullback(ctx, wrong));
  CHECK(report.verdict.refuted());
}

TEST_CASE("evaluation compatibility with the pushforward point") {
  auto oy = DomainSpec::box({-2}, {2});
  auto ox = DomainSpec::box({-3}, {3});
  auto phi = CBoundedMap::make(ctx, oy, ox, {parse("(+ x1 eps)")});
  AlgebraMorphism Phi = pullback(ctx, phi);
  std::mt19937_64 rng(41);
  auto pts = corpus::random_points(ctx, oy, rng, 5);
  auto corpus_x = probe_corpus(ctx, ox, 4);
  for (const auto& y : pts) {
    // pushforward: components evaluated along y
    GeneralizedPoint push;
    for (const auto& comp : phi.comps)
      push.comps.push_back(simplify(substitute_vars(comp.rep(), y.comps)));
    Ival r = eval_interval(push.comps[0], eps_germ(ctx.grid.largest()), {});
    push.support = Box{{r.lo - 1e-9}, {r.hi + 1e-9}};
    for (const auto& u : corpus_x) {
      GN lhs = eval_at(ctx, Phi.act(u), y);
      GN rhs = eval_at(ctx, u, push);
      CHECK(!gn_eq(ctx, lhs, rhs).refuted());
    }
  }
}

TEST_CASE("non-homomorphisms are rejected by the audit") {
  auto ox = DomainSpec::box({-3}, {3});
  Context c = ctx;
  AlgebraMorphism bad;
  bad.domain_x = ox;
  bad.domain_y = ox;
  bad.unit_flag = true;
  bad.label = "u + du";
  bad.act = [c, ox](const GF& u) {
    return GF::make(c, ox, u.rep() + simplify(differentiate(u.rep(), 1)));
  };
  Verdict v = audit_morphism(ctx, bad);
  CHECK(v.refuted());
  CHECK_THROWS_AS(recover_map(ctx, bad), std::invalid_argument);
}
