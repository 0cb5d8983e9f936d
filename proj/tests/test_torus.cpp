#include <doctest.h>

#include <cmath>
#include <numbers>

#include "clab/corpus.hpp"

using namespace clab;

namespace {
Context ctx;
TorusModel circle = TorusModel::circle();
}  // namespace

TEST_CASE("sup norm, range and spectral radius coincide with the image") {
  TorusFun f = TorusFun::from_expr(circle, "(cos x1)");
  auto sn = sup_norm(ctx, f);
  CHECK(sn.value == doctest::Approx(1.0).epsilon(1e-12));
  auto rg = spectrum_range(ctx, f);
  CHECK(rg.min == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rg.max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spectral_radius(ctx, f) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(spectral_radius(ctx, TorusFun::from_expr(circle, "(+ 2 (cos x1))")) ==
        doctest::Approx(3.0).epsilon(1e-12));

  // cross-check by dense refinement: r from the lattice is within 1e-6 of a
  // brute-force scan at 8x density
  TorusFun g = TorusFun::from_expr(circle,
                                   "(+ (cos x1) (* 1/2 (cos (* 2 x1))))");
  double r = spectral_radius(ctx, g);
  double brute = 0;
  for (int i = 0; i < 4096; ++i) {
    double t = 2 * std::numbers::pi * i / 4096;
    brute = std::max(brute, std::fabs(std::cos(t) + 0.5 * std::cos(2 * t)));
  }
  CHECK(r == doctest::Approx(brute).epsilon(1e-6));

  // spectral radius equals the sup norm across a corpus
  std::mt19937_64 rng(8);
  for (const auto& h : corpus::norm_corpus(circle, rng, 10))
    CHECK(std::fabs(spectral_radius(ctx, h) - sup_norm(ctx, h).value) <=
          1e-12);
}

TEST_CASE("resolvent checks") {
  TorusFun f = TorusFun::from_expr(circle, "(cos x1)");
  Verdict out = resolvent_check(ctx, f, {2.0, 0.0});
  CHECK(out.proven());
  // resolvent norm bound 1/dist(lambda, range) = 1
  CHECK(*out.slope == doctest::Approx(1.0).epsilon(1e-9));
  Verdict in = resolvent_check(ctx, f, {0.5, 0.0});
  CHECK(in.refuted());
  REQUIRE(!in.witnesses.empty());
  // cos(theta) = 0.5 at theta = pi/3; the witness is lattice-close
  double spacing = 2 * std::numbers::pi / circle.lattice_n;
  CHECK(std::fabs(std::cos(in.witnesses[0].eps) - 0.5) <= spacing);
  CHECK(resolvent_check(ctx, f, {0.0, 1.0}).proven());
}

TEST_CASE("holomorphic closure") {
  CHECK(holomorphic_closure_check(
            ctx, TorusFun::from_expr(circle, "(+ 2 (cos x1))"))
            .proven());
  CHECK(holomorphic_closure_check(ctx, TorusFun::from_expr(circle, "(cos x1)"))
            .refuted());
  CHECK(holomorphic_closure_check(
            ctx, TorusFun::from_expr(circle, "(+ 1/100 (cos x1))"))
            .refuted());
}

TEST_CASE("derivations and their pullbacks") {
  Derivation D = coeff_derivation(ctx, circle, {c_int(1)}, "d/dtheta");
  TorusFun cosf = TorusFun::from_expr(circle, "(cos x1)");
  CHECK(seminorm(ctx, cosf, std::vector<Derivation>{D}) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(seminorm(ctx, cosf, std::vector<Derivation>{}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(seminorm(ctx, cosf, std::vector<Derivation>{D, D}) ==
        doctest::Approx(1.0).epsilon(1e-8));

  // identity pullback
  TorusDiffeo id = TorusDiffeo::make(ctx, circle, 1, c_int(0));
  Derivation Did = derivation_pullback(ctx, pullback_iso(ctx, id), D);
  TorusFun sinf = TorusFun::from_expr(circle, "(sin x1)");
  auto dtab = Did.action(sinf).table();
  auto reference = sinf.derivative().table();
  for (std::size_t i = 0; i < dtab.size(); i += 37)
    CHECK(dtab[i] == doctest::Approx(reference[i]).epsilon(1e-9));

  // rotation pullback of the translation-invariant field stays d/dtheta
  TorusDiffeo rot = TorusDiffeo::make(ctx, circle, 1, c_rat(1, 2));
  Derivation Drot = derivation_pullback(ctx, pullback_iso(ctx, rot), D);
  auto rtab = Drot.action(sinf).table();
  for (std::size_t i = 0; i < rtab.size(); i += 41)
    CHECK(rtab[i] == doctest::Approx(reference[i]).epsilon(1e-8));

  // chain-rule oracle for psi = theta + 0.3 sin(theta):
  // Psi*(d/dtheta) carries the coefficient psi'(psi^{-1}(theta))
  TorusDiffeo wig =
      TorusDiffeo::make(ctx, circle, 1, parse("(* 3/10 (sin x1))"));
  Derivation Dw = derivation_pullback(ctx, pullback_iso(ctx, wig), D);
  TorusFun out = Dw.action(sinf);
  for (double theta : {0.3, 1.1, 2.9, 4.4, 6.0}) {
    double inv = wig.inverse(theta);
    double expect = (1.0 + 0.3 * std::cos(inv)) * std::cos(theta);
    CHECK(out.eval1(theta) == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("norm preservation and seminorm transfer") {
  std::mt19937_64 rng(12);
  auto corpus = corpus::norm_corpus(circle, rng, 8, 3);
  Derivation D = coeff_derivation(ctx, circle, {c_int(1)}, "d/dtheta");
  std::vector<std::vector<Derivation>> tuples = {{D}, {D, D}};

  for (auto& psi : corpus::diffeo_corpus(ctx, circle)) {
    SmoothIso Psi = pullback_iso(ctx, psi);
    CHECK(audit_iso(ctx, Psi).not_refuted());
    auto np = verify_norm_preservation(ctx, Psi, corpus);
    CHECK(np.all_passed);
    auto st = verify_seminorm_transfer(ctx, Psi, corpus, tuples);
    CHECK(st.all_passed);
  }

  // a non-unital action fails the audit
  SmoothIso doubler;
  doubler.model = circle;
  doubler.symbolic = false;
  doubler.label = "2f";
  doubler.fwd = [](const TorusFun& f) {
    auto t = f.table();
    for (auto& v : t) v *= 2.0;
    return TorusFun::from_table(f.model(), std::move(t));
  };
  doubler.inv = doubler.fwd;
  CHECK(audit_iso(ctx, doubler).refuted());
}

TEST_CASE("Colombeau lift preserves classes") {
  TorusDiffeo wig =
      TorusDiffeo::make(ctx, circle, 1, parse("(* 3/10 (sin x1))"));
  SmoothIso Psi = pullback_iso(ctx, wig);
  auto lift = lift_isomorphism(ctx, Psi, wig);
  CHECK(lift.well_defined.proven());

  // negligible stays negligible under a rotation pullback
  TorusDiffeo rot = TorusDiffeo::make(ctx, circle, 1, c_int(1));
  auto lift_rot = lift_isomorphism(ctx, pullback_iso(ctx, rot), rot);
  Expr negl = parse("(* (exp (neg (/ 1 eps))) (cos x1))");
  auto before = classify_torus_net(ctx, circle, negl);
  auto after = classify_torus_net(ctx, circle, lift_rot.act(negl));
  CHECK(before.negligible.not_refuted());
  CHECK(after.negligible.not_refuted());

  // slope -2 is preserved under the wiggle pullback
  Expr net = parse("(* (pow eps -2) (cos x1))");
  auto supnet = [&](const Expr& e) {
    auto nodes = circle.axis_nodes();
    auto batch = std::make_shared<kernels::BatchEval>(e);
    auto coords = std::make_shared<std::vector<std::vector<double>>>(
        std::vector<std::vector<double>>{nodes});
    return EpsNet::from_fn(
        [batch, coords, n = nodes.size()](double eps) {
          std::vector<double> out(n);
          batch->eval_lattice(eps, *coords, n, out.data());
          double sup = 0;
          for (double v : out) sup = std::max(sup, std::fabs(v));
          return sup;
        },
        "sup");
  };
  double s0 = fit_order(supnet(net), ctx.grid).slope;
  double s1 = fit_order(supnet(lift.act(net)), ctx.grid).slope;
  CHECK(s0 == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(s1 == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("diffeomorphism extraction round-trips") {
  std::mt19937_64 rng(19);
  auto corpus = corpus::norm_corpus(circle, rng, 5, 3);
  for (auto& hidden : corpus::diffeo_corpus(ctx, circle)) {
    SmoothIso Psi = pullback_iso(ctx, hidden);
    auto ex = extract_diffeo(ctx, Psi, corpus);
    CHECK(ex.verdict.proven());
    double worst = 0;
    for (double t : circle.axis_nodes())
      worst = std::max(worst, std::fabs(ex.psi.apply(t) - hidden.apply(t)));
    CHECK(worst <= 1e-8);
    CHECK(ex.psi.orientation() == hidden.orientation());
  }
}

TEST_CASE("black-box isomorphisms work through tabulation") {
  // hidden diffeo given only by its lattice values
  TorusDiffeo symbolic =
      TorusDiffeo::make(ctx, circle, 1, parse("(* 3/10 (sin x1))"));
  std::vector<double> f_vals;
  for (double t : circle.axis_nodes())
    f_vals.push_back(0.3 * std::sin(t));
  TorusDiffeo hidden = TorusDiffeo::from_table(ctx, circle, 1, f_vals);
  CHECK(!hidden.symbolic());
  SmoothIso Psi = pullback_iso(ctx, hidden);
  CHECK(!Psi.symbolic);
  CHECK(audit_iso(ctx, Psi).not_refuted());

  std::mt19937_64 rng(33);
  auto corpus = corpus::norm_corpus(circle, rng, 4, 3);
  auto np = verify_norm_preservation(ctx, Psi, corpus);
  CHECK(np.all_passed);

  auto ex = extract_diffeo(ctx, Psi, corpus);
  CHECK(ex.verdict.proven());
  double worst = 0;
  for (double t : circle.axis_nodes())
    worst = std::max(worst, std::fabs(ex.psi.apply(t) - symbolic.apply(t)));
  CHECK(worst <= 1e-8);
}

TEST_CASE("extraction rejects non-pullback actions") {
  SmoothIso scaled;
  scaled.model = circle;
  scaled.symbolic = false;
  scaled.label = "2f";
  scaled.fwd = [](const TorusFun& f) {
    auto t = f.table();
    for (auto& v : t) v *= 2.0;
    return TorusFun::from_table(f.model(), std::move(t));
  };
  scaled.inv = scaled.fwd;
  std::mt19937_64 rng(20);
  auto corpus = corpus::norm_corpus(circle, rng, 2, 2);
  CHECK_THROWS_AS(extract_diffeo(ctx, scaled, corpus), std::invalid_argument);
}

TEST_CASE("two-dimensional torus sup and range") {
  TorusModel t2 = TorusModel::torus2(64);
  TorusFun f = TorusFun::from_expr(t2, "(+ (cos x1) (cos x2))");
  CHECK(sup_norm(ctx, f).value == doctest::Approx(2.0).epsilon(1e-12));
  auto rg = spectrum_range(ctx, f);
  CHECK(rg.min == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(spectral_radius(ctx, f) == doctest::Approx(2.0).epsilon(1e-12));
  Derivation D1 = coeff_derivation(ctx, t2, {c_int(1), c_int(0)}, "d1");
  CHECK(seminorm(ctx, f, std::vector<Derivation>{D1}) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sup refinement reports its discrepancy") {
  // a sharp off-node peak: the coarse lattice misses it, the report says so
  TorusFun sharp = TorusFun::from_expr(
      circle, "(exp (* -40 (pow (sin (* 1/2 (- x1 1/1000))) 2)))");
  auto sn = sup_norm(ctx, sharp);
  CHECK(sn.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sn.lattice_n == 2 * circle.lattice_n);
  CHECK(sn.discrepancy >= 0.0);
}

TEST_CASE("periodicity is enforced") {
  CHECK_THROWS_AS(TorusFun::from_expr(circle, "x1"), std::invalid_argument);
  CHECK_NOTHROW(TorusFun::from_expr(circle, "(sin (* 3 x1))"));
  CHECK_THROWS_AS(TorusDiffeo::make(ctx, circle, 1, parse("(* 2 (sin x1))")),
                  std::invalid_argument);  // Jacobian certificate fails
}
