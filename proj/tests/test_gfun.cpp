#include <doctest.h>

#include <cmath>

#include "clab/corpus.hpp"

using namespace clab;

namespace {
Context ctx;
DomainSpec dom = corpus::standard_domain();

GeneralizedPoint origin() {
  return GeneralizedPoint::constant({0.0}, Box{{-0.1}, {0.1}});
}
}  // namespace

TEST_CASE("smooth embedding is a faithful subalgebra") {
  CHECK(equal(embed_smooth(ctx, c_int(1), dom).rep(), c_int(1)));
  // 100 random eps-free pairs: embed(f)*embed(g) == embed(fg), exactly
  std::mt19937_64 rng(2);
  std::vector<Expr> pool = {
      parse("x1"),
      parse("(sin x1)"),
      parse("(cos x1)"),
      parse("(pow x1 2)"),
      parse("(+ 2 (sin x1))"),
      parse("(atan x1)"),
      parse("(+ 1 (* 1/4 (pow x1 3)))"),
  };
  for (int i = 0; i < 100; ++i) {
    Expr f = pool[rng() % pool.size()];
    Expr g = pool[rng() % pool.size()] * pool[rng() % pool.size()];
    GF a = embed_smooth(ctx, f, dom);
    GF b = embed_smooth(ctx, g, dom);
    Verdict v = gf_eq(ctx, gf_mul(ctx, a, b), embed_smooth(ctx, f * g, dom));
    CHECK(v.proven());
  }
  // multiplicativity is exact on representatives after simplify
  GF x1 = embed_smooth(ctx, parse("x1"), dom);
  GF sx = embed_smooth(ctx, parse("(sin x1)"), dom);
  CHECK(equal(gf_mul(ctx, x1, sx).rep(),
              embed_smooth(ctx, parse("(* x1 (sin x1))"), dom).rep()));
}

TEST_CASE("seminorm nets against the lattice oracle") {
  // ep-constant: sup over [-1,1] of |sin| is sin(1), attained at the pinned
  // endpoint of K_1
  GF u = embed_smooth(ctx, parse("(sin x1)"), DomainSpec::box({-2}, {2}));
  EpsNet net = seminorm_net(ctx, u, 1, {0});
  CHECK(net.fn(0.0625) == std::sin(1.0));
  CHECK(net.fn(0.001) == std::sin(1.0));

  // Heaviside model: the first derivative's sup grows like 1/eps
  GF H = embed_heaviside(ctx, dom);
  auto fit = fit_order(seminorm_net(ctx, H, 4, {1}), ctx.grid);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-6));

  GF zero = GF::make(ctx, dom, "0");
  CHECK(seminorm_net(ctx, zero, 2, {0}).fn(0.01) == 0.0);
}

TEST_CASE("classification over the exhaustion") {
  GF f = embed_smooth(ctx, parse("(sin x1)"), dom);
  CHECK(check_moderate_gf(ctx, f).proven());

  GF delta = embed_delta(ctx, dom);
  CHECK(check_moderate_gf(ctx, delta).not_refuted());
  // order 0: the fixed lattice contains x = 0 where the bump peaks, so the
  // sup net is exactly c/eps on the whole grid
  auto fit0 = fit_order(seminorm_net(ctx, delta, 4, {0}), ctx.grid);
  CHECK(fit0.slope == doctest::Approx(-1.0).epsilon(1e-9));
  // higher orders concentrate between fixed-lattice nodes once eps drops
  // below the spacing; measure the sup on an eps-adapted lattice instead
  for (int order = 1; order <= 2; ++order) {
    Expr d = delta.rep();
    for (int k = 0; k < order; ++k) d = simplify(differentiate(d, 1));
    auto batch = std::make_shared<kernels::BatchEval>(d);
    EpsNet adapted = EpsNet::from_fn(
        [batch](double eps) {
          std::vector<double> xs;
          for (int i = -128; i <= 128; ++i)
            xs.push_back(eps * static_cast<double>(i) / 128.0);
          std::vector<std::vector<double>> coords{xs};
          std::vector<double> out(xs.size());
          batch->eval_lattice(eps, coords, xs.size(), out.data());
          double sup = 0;
          for (double v : out) sup = std::max(sup, std::fabs(v));
          return sup;
        },
        "adapted sup");
    auto fit = fit_order(adapted, ctx.grid);
    CHECK(fit.slope == doctest::Approx(-(1.0 + order)).epsilon(1e-6));
  }

  GF negl = GF::make(ctx, dom, "(* (exp (neg (/ 1 eps))) (sin x1))");
  CHECK(check_negligible_gf(ctx, negl).proven());
  CHECK(check_moderate_gf(ctx, negl).proven());

  GF notnegl = embed_smooth(ctx, parse("(+ 2 (sin x1))"), dom);
  CHECK(check_negligible_gf(ctx, notnegl).refuted());
}

TEST_CASE("negligibility at order 0 coheres with derivative moderateness") {
  const char* reps[] = {
      "(* (exp (neg (/ 1 eps))) (sin (* 3 x1)))",
      "(* (exp (neg (/ 1 eps))) (smoothstep (/ x1 eps)))",
      "(* (flatexp eps 1) (cos (/ x1 (+ 1 eps))))",
  };
  for (const char* r : reps) {
    GF u = GF::make(ctx, dom, r);
    CHECK(check_negligible_gf(ctx, u).not_refuted());
    CHECK(check_moderate_gf(ctx, u).not_refuted());
  }
}

TEST_CASE("point values") {
  GF sq = embed_smooth(ctx, parse("(pow x1 2)"), dom);
  GeneralizedPoint p;
  p.comps = {parse("(+ 1 eps)")};
  p.support = Box{{0.85}, {1.15}};
  GN v = eval_at(ctx, sq, p);
  CHECK(equal(v.rep(), parse("(pow (+ eps 1) 2)")));

  // negligible function: negligible value at every point
  GF negl = GF::make(ctx, dom, "(* (exp (neg (/ 1 eps))) (cos x1))");
  CHECK(eval_at(ctx, negl, p).negligible(ctx).proven());

  // the step model s(x/eps) sampled along x = eps/2 is the constant s(1/2),
  // which this smoothstep evaluates to exactly 1/2
  GF step = GF::make(ctx, dom, "(smoothstep (/ x1 eps))");
  GeneralizedPoint q;
  q.comps = {parse("(* 1/2 eps)")};
  q.support = Box{{-0.1}, {0.1}};
  GN hv = eval_at(ctx, step, q);
  CHECK(hv.net().fn(0.03125) == 0.5);
  CHECK(hv.net().fn(1e-6) == 0.5);

  // support escaping the domain is an error
  GeneralizedPoint bad;
  bad.comps = {parse("3")};
  bad.support = Box{{2.9}, {3.1}};
  CHECK_THROWS_AS(eval_at(ctx, sq, bad), std::invalid_argument);
}

TEST_CASE("eval_at respects equality on panel points") {
  GF a = GF::make(ctx, dom, "(* (+ 2 (sin x1)) eps)");
  GF b = GF::make(ctx, dom,
                  "(+ (* (+ 2 (sin x1)) eps) (exp (neg (/ 1 eps))))");
  CHECK(gf_eq(ctx, a, b).proven());
  std::mt19937_64 rng(5);
  for (const auto& p : corpus::random_points(ctx, dom, rng, 6)) {
    CHECK(!gn_eq(ctx, eval_at(ctx, a, p), eval_at(ctx, b, p)).refuted());
  }
}

TEST_CASE("S-invertibility in the function algebra") {
  auto S = EpsSubset::whole_interval(ctx.grid);
  GF inv = embed_smooth(ctx, parse("(+ 2 (sin x1))"), dom);
  auto nz = gf_strictly_nonzero_on(ctx, inv, S);
  CHECK(nz.verdict.not_refuted());
  auto si = gf_s_inverse(ctx, inv, S);
  CHECK(si.contract.proven());
  double x[1] = {0.5};
  CHECK(si.v.value(0.0625, x) ==
        doctest::Approx(1.0 / (2.0 + std::sin(0.5))).epsilon(1e-12));

  GF linear = embed_smooth(ctx, parse("x1"), dom);
  CHECK(gf_strictly_nonzero_on(ctx, linear, S).verdict.refuted());

  GF eps1 = GF::make(ctx, dom, "eps");
  auto si2 = gf_s_inverse(ctx, eps1, S);
  CHECK(si2.m == 2);
  CHECK(si2.v.value(0.0625, x) == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("pointwise invertibility audit, both directions") {
  auto S = EpsSubset::whole_interval(ctx.grid);
  std::mt19937_64 rng(11);
  GF inv = embed_smooth(ctx, parse("(+ 2 (sin x1))"), dom);
  auto fwd = pointwise_invertibility_audit(ctx, inv, S, rng);
  CHECK(fwd.verdict.proven());
  CHECK(!fwd.witness.has_value());

  GF linear = embed_smooth(ctx, parse("x1"), dom);
  auto rev = pointwise_invertibility_audit(ctx, linear, S, rng);
  CHECK(rev.verdict.refuted());
  CHECK(rev.verdict.rule == "reverse-witness");
  REQUIRE(rev.witness.has_value());
  REQUIRE(rev.witness_value_negligible.has_value());
  CHECK(rev.witness_value_negligible->not_refuted());

  GF one = embed_smooth(ctx, c_int(1), dom);
  CHECK(pointwise_invertibility_audit(ctx, one, S, rng).verdict.proven());
}

TEST_CASE("model distributions and the multiplication obstruction") {
  GF H = embed_heaviside(ctx, dom);
  GF H2H = gf_sub(ctx, gf_mul(ctx, H, H), H);
  GN at0 = eval_at(ctx, H2H, origin());
  for (double e : ctx.grid.samples())
    CHECK(std::fabs(at0.net().fn(e) + 0.25) <= 1e-12);

  GF delta = embed_delta(ctx, dom);
  GN d0 = eval_at(ctx, delta, origin());
  auto fit = fit_order(d0.net(), ctx.grid);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-9));

  // (delta-like) * (smooth f) at x = 0 is the f(0) * delta(0) net
  GF fdelta = gf_smooth_mul(ctx, parse("(+ 2 (cos x1))"), delta);
  GN fd0 = eval_at(ctx, fdelta, origin());
  for (double e : {0.0625, 0.001}) {
    CHECK(fd0.net().fn(e) ==
          doctest::Approx(3.0 * d0.net().fn(e)).epsilon(1e-12));
  }

  // the normalization constant: integral of the delta model is 1
  const auto& dn = delta_normalization();
  CHECK(std::fabs(dn.c.to_double() * dn.integral - 1.0) < 1e-12);
}

TEST_CASE("association pairing against test functions") {
  Expr psi = parse("(* (smoothstep (+ (* 2 x1) 1)) (smoothstep (- 1 (* 2 x1))))");
  // ep-constant functions pair to a constant
  GF f = embed_smooth(ctx, parse("(+ 1 x1)"), dom);
  auto pf = association_pairing(ctx, f, psi, -0.5, 0.5);
  double first = pf.front().value;
  for (const auto& s : pf)
    if (s.converged) CHECK(s.value == doctest::Approx(first).epsilon(1e-9));

  // delta pairs to psi(0) = 1
  GF delta = embed_delta(ctx, dom);
  auto pd = association_pairing(ctx, delta, psi, -0.5, 0.5);
  std::optional<PairingSample> last;
  for (const auto& s : pd)
    if (s.converged) last = s;
  REQUIRE(last.has_value());
  CHECK(std::fabs(last->value - 1.0) <= 1e-5);

  // H' pairs to psi(0) as well (association with delta)
  GF H = embed_heaviside(ctx, dom);
  GF Hprime = GF::make(ctx, dom, simplify(differentiate(H.rep(), 1)));
  auto ph = association_pairing(ctx, Hprime, psi, -0.5, 0.5);
  std::optional<PairingSample> lastH;
  for (const auto& s : ph)
    if (s.converged) lastH = s;
  REQUIRE(lastH.has_value());
  CHECK(std::fabs(lastH->value - 1.0) <= 1e-6);

  // delta^2 diverges like eps^-1
  GF d2 = gf_mul(ctx, delta, delta);
  auto p2 = association_pairing(ctx, d2, psi, -0.5, 0.5);
  std::vector<double> xs, ys;
  for (const auto& s : p2)
    if (s.converged && s.value > 0) {
      xs.push_back(std::log(s.eps));
      ys.push_back(std::log(s.value));
    }
  REQUIRE(xs.size() >= 4);
  double n = static_cast<double>(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("multiplication by smooth eps-free functions") {
  GF u = GF::make(ctx, dom, "(* eps (+ 2 (sin x1)))");
  GF fu = gf_smooth_mul(ctx, parse("(cos x1)"), u);
  CHECK(equal(fu.rep(), simplify(parse("(* (* eps (+ 2 (sin x1))) (cos x1))"))));
  CHECK_THROWS_AS(gf_smooth_mul(ctx, parse("eps"), u), std::invalid_argument);
}

TEST_CASE("sweeps honor the thread cap deterministically") {
  // values() must not depend on the worker count
  EpsNet net = seminorm_net(ctx, embed_delta(ctx, dom), 4, {0});
  auto eps = ctx.grid.samples();
  auto v1 = net.values(eps);
  auto v2 = net.values(eps);
  CHECK(v1 == v2);
}

TEST_CASE("spatial abs is rejected, eps-only abs is fine") {
  CHECK_THROWS_AS(GF::make(ctx, dom, "(abs x1)"), std::invalid_argument);
  CHECK_NOTHROW(GF::make(ctx, dom, "(* (abs (sin (/ 1 eps))) (cos x1))"));
}
