#include <doctest.h>

#include <cmath>

#include "clab/corpus.hpp"

using namespace clab;

namespace {
Context ctx;
DomainSpec dom = corpus::standard_domain();
}  // namespace

TEST_CASE("point equivalence") {
  GeneralizedPoint a;
  a.comps = {parse("eps")};
  a.support = Box{{-0.1}, {0.1}};
  CHECK(point_equal(ctx, a, a).proven());

  GeneralizedPoint b;
  b.comps = {parse("(+ eps (exp (neg (/ 1 eps))))")};
  b.support = a.support;
  CHECK(point_equal(ctx, a, b).proven());

  GeneralizedPoint c;
  c.comps = {parse("(* 2 eps)")};
  c.support = a.support;
  Verdict v = point_equal(ctx, a, c);
  CHECK(v.refuted());
}

TEST_CASE("point equivalence behaves like an equivalence relation") {
  std::mt19937_64 rng(17);
  auto pts = corpus::random_points(ctx, dom, rng, 9);
  for (const auto& p : pts) CHECK(point_equal(ctx, p, p).proven());
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    auto ab = point_equal(ctx, pts[i], pts[i + 1]);
    auto ba = point_equal(ctx, pts[i + 1], pts[i]);
    CHECK(ab.status == ba.status);
  }
  // transitivity probe on a perturbation chain
  GeneralizedPoint x = pts[0];
  GeneralizedPoint y = x, z = x;
  y.comps[0] = x.comps[0] + parse("(exp (neg (/ 1 eps)))");
  z.comps[0] = y.comps[0] + parse("(exp (neg (pow eps -2)))");
  CHECK(point_equal(ctx, x, y).not_refuted());
  CHECK(point_equal(ctx, y, z).not_refuted());
  CHECK(point_equal(ctx, x, z).not_refuted());
}

TEST_CASE("compact support checks") {
  GeneralizedPoint osc;
  osc.comps = {parse("(sin (/ 1 eps))")};
  osc.support = Box{{-1.0}, {1.0}};
  CHECK(is_compactly_supported(ctx, osc).proven());

  GeneralizedPoint blow;
  blow.comps = {parse("(pow eps -1)")};
  blow.support = Box{{0.0}, {2.0}};
  CHECK(is_compactly_supported(ctx, blow).refuted());

  GeneralizedPoint drift;
  drift.comps = {parse("(+ 1 eps)")};
  drift.support = Box{{0.0}, {2.0}};
  CHECK(is_compactly_supported(ctx, drift).proven());
}

TEST_CASE("partition-of-unity interpolation hits knots exactly") {
  std::vector<double> knots, values;
  for (int k = 1; k <= 12; ++k) {
    knots.push_back(scalar_ops::pow_int(0.5, k));
    values.push_back(1.0 / k);
  }
  Expr net = pou_interpolate(knots, values);
  EpsNet n = EpsNet::from_expr(net);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    CHECK(n.fn(knots[i]) == values[i]);  // 0 ulp at the knots
  }
  // convex hull between knots
  for (double e : {0.7e-1, 0.3e-1, 0.01, 0.002}) {
    double v = n.fn(e);
    CHECK(v >= 1.0 / 12 - 1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
  // outside the knot range the net is constant
  CHECK(n.fn(0.9) == values[0]);
  CHECK(n.fn(1e-9) == values.back());
  // the net is moderate (bounded)
  CHECK(check_moderate(n, ctx.grid, ctx.asym).not_refuted());
}

TEST_CASE("witness interpolation") {
  // single sample: constant net
  GeneralizedPoint single =
      interpolate_witness(std::vector<double>{0.25},
                          std::vector<std::vector<double>>{{0.5}}, 1);
  CHECK(equal(single.comps[0], const_from_double(0.5)));

  // all samples equal: equivalent to the constant point
  std::vector<double> knots{0.25, 0.1, 0.04, 0.015, 0.005};
  std::vector<std::vector<double>> pts(knots.size(), {0.75});
  GeneralizedPoint constant = interpolate_witness(knots, pts, 1);
  GeneralizedPoint direct = GeneralizedPoint::constant({0.75}, constant.support);
  CHECK(point_equal(ctx, constant, direct).proven());

  // samples too close must be re-thinned first
  std::vector<double> tight{0.5, 0.48, 0.2};
  std::vector<std::vector<double>> tp(3, {0.0});
  CHECK_THROWS_AS(interpolate_witness(tight, tp, 1), std::invalid_argument);
  auto keep = thin_eps_samples(tight);
  CHECK(keep == std::vector<std::size_t>{0, 2});
}

TEST_CASE("evaluation functionals recover their points") {
  std::mt19937_64 rng(23);
  auto pts = corpus::random_points(ctx, dom, rng, 20);
  for (const auto& p : pts) {
    Functional nu = evaluation_functional(ctx, p, dom);
    auto rec = recover_point(ctx, nu);
    CHECK(rec.audit.not_refuted());
    CHECK(rec.verification.not_refuted());
    CHECK(point_equal(ctx, p, rec.point).proven());
  }
  // hidden behind a negligible re-randomization
  GeneralizedPoint p = pts[0];
  GeneralizedPoint hidden = p;
  hidden.comps[0] = p.comps[0] + parse("(exp (neg (/ 1 eps)))");
  Functional nu = evaluation_functional(ctx, hidden, dom);
  auto rec = recover_point(ctx, nu);
  CHECK(point_equal(ctx, p, rec.point).proven());
}

TEST_CASE("non-multiplicative functionals are rejected with the probe") {
  std::mt19937_64 rng(29);
  auto pts = corpus::random_points(ctx, dom, rng, 2);
  Context c = ctx;
  GeneralizedPoint p1 = pts[0], p2 = pts[1];
  DomainSpec d = dom;

  Functional affine;
  affine.domain = dom;
  affine.label = "(ev1+ev2)/2";
  affine.act = [c, p1, p2](const GF& u) {
    return gn_scale(c, gn_add(c, eval_at(c, u, p1), eval_at(c, u, p2)),
                    Rational(1, 2));
  };
  Verdict va = audit_functional(ctx, affine);
  CHECK(va.refuted());
  CHECK(va.rule == "audit:multiplicativity");
  CHECK_THROWS_AS(recover_point(ctx, affine), std::invalid_argument);

  Functional scaled;
  scaled.domain = dom;
  scaled.label = "2ev";
  scaled.act = [c, p1](const GF& u) {
    return gn_scale(c, eval_at(c, u, p1), Rational(2));
  };
  CHECK(audit_functional(ctx, scaled).rule == "audit:unit");

  Functional deriv;
  deriv.domain = dom;
  deriv.label = "ev after d/dx";
  deriv.act = [c, p1, d](const GF& u) {
    return eval_at(c, GF::make(c, d, simplify(differentiate(u.rep(), 1))), p1);
  };
  CHECK(audit_functional(ctx, deriv).refuted());
}
