#include <doctest.h>

#include <cmath>

#include "clab/corpus.hpp"

using namespace clab;

namespace {
Context ctx;
}

TEST_CASE("ring operations at the representative level") {
  GN a = GN::make(ctx, "eps");
  GN na = GN::make(ctx, "(neg eps)");
  GN sum = gn_add(ctx, a, na);
  CHECK(equal(sum.rep(), c_int(0)));
  CHECK(sum.negligible(ctx).proven());

  GN prod = gn_mul(ctx, GN::make(ctx, "(pow eps -1)"), a);
  CHECK(equal(prod.rep(), c_int(1)));

  GN trig = GN::make(ctx,
                     "(+ (pow (sin (/ 1 eps)) 2) (pow (cos (/ 1 eps)) 2))");
  Verdict eq = gn_eq(ctx, trig, GN::make(ctx, "1"));
  CHECK(eq.proven());
}

TEST_CASE("constructors reject non-moderate representatives") {
  CHECK_THROWS_AS(GN::make(ctx, "(exp (/ 1 eps))"), std::invalid_argument);
  CHECK_NOTHROW(GN::make(ctx, "(pow eps -12)"));
}

TEST_CASE("equality in the quotient") {
  GN a = GN::make(ctx, "eps");
  CHECK(gn_eq(ctx, a, GN::make(ctx, "(+ eps (exp (neg (/ 1 eps))))")).proven());
  Verdict v = gn_eq(ctx, a, GN::make(ctx, "(pow eps 2)"));
  CHECK(v.refuted());
  CHECK(!v.witnesses.empty());
  CHECK(gn_eq(ctx, GN::make(ctx, "0"), GN::make(ctx, "0")).proven());
}

TEST_CASE("distributive normal form proves ring identities exactly") {
  Expr A = parse("(* (pow eps -6) (sin (/ 1 eps)))");
  Expr B = parse("(+ 1 eps)");
  Expr C = parse("(+ -1 (pow eps 2))");
  CHECK(normalizes_to_zero(A * (B + C), A * B + A * C));
  CHECK(normalizes_to_zero((A * B) * C, A * (B * C)));
  CHECK(normalizes_to_zero(A * B, B * A));
  CHECK(!normalizes_to_zero(A * B, A * C));
}

TEST_CASE("ring axioms never refuted on seeded triples") {
  std::mt19937_64 rng(1);
  auto reps = corpus::random_gn_reps(rng, 60);
  for (std::size_t i = 0; i + 2 < reps.size(); i += 3) {
    GN a = GN::make(ctx, reps[i]);
    GN b = GN::make(ctx, reps[i + 1]);
    GN c = GN::make(ctx, reps[i + 2]);
    CHECK(!gn_eq(ctx, gn_add(ctx, gn_add(ctx, a, b), c),
                 gn_add(ctx, a, gn_add(ctx, b, c)))
               .refuted());
    CHECK(!gn_eq(ctx, gn_mul(ctx, a, b), gn_mul(ctx, b, a)).refuted());
    CHECK(!gn_eq(ctx, gn_mul(ctx, a, gn_add(ctx, b, c)),
                 gn_add(ctx, gn_mul(ctx, a, b), gn_mul(ctx, a, c)))
               .refuted());
  }
}

TEST_CASE("strict non-vanishing on subsets") {
  auto S = EpsSubset::whole_interval(ctx.grid);
  GN r = GN::make(ctx, "eps");
  auto nz = strictly_nonzero_on(ctx, r, S);
  CHECK(nz.verdict.proven());
  CHECK(*nz.exponent == 2);

  // oscillator along its own peaks: |sin| = 1 there
  std::vector<double> peaks;
  for (int k = 2; peaks.size() < 24; ++k) {
    double e = 1.0 / (M_PI / 2 + 2 * M_PI * k);
    peaks.push_back(e);
  }
  auto S2 = EpsSubset::from_samples(peaks);
  GN osc = GN::make(ctx, "(sin (/ 1 eps))");
  auto nz2 = strictly_nonzero_on(ctx, osc, S2);
  CHECK(nz2.verdict.not_refuted());
  CHECK(*nz2.exponent == 1);
  for (int i = 0; i < 8; ++i)
    CHECK(std::fabs(osc.net().fn(peaks[static_cast<std::size_t>(i)])) >=
          0.999999);

  GN negl = GN::make(ctx, "(exp (neg (/ 1 eps)))");
  CHECK(strictly_nonzero_on(ctx, negl, S).verdict.refuted());
}

TEST_CASE("the S-inverse construction") {
  auto S = EpsSubset::whole_interval(ctx.grid);
  GN r = GN::make(ctx, "eps");
  auto si = s_inverse(ctx, r, S);
  CHECK(si.m == 2);
  CHECK(si.contract.proven());
  // s equals 1/eps on the chi=1 region
  double e = scalar_ops::pow_int(0.5, 20);
  CHECK(si.s.net().fn(e) == doctest::Approx(1.0 / e).epsilon(1e-12));
  // rprime is chi and equals 1 on S
  CHECK(si.rprime.net().fn(e) == 1.0);

  GN one = GN::make(ctx, "1");
  auto si1 = s_inverse(ctx, one, S);
  CHECK(si1.contract.proven());
  CHECK(si1.rprime.net().fn(0.03125) == 1.0);
  CHECK(si1.s.net().fn(0.03125) == 1.0);

  GN negl = GN::make(ctx, "(exp (neg (/ 1 eps)))");
  CHECK_THROWS_AS(s_inverse(ctx, negl, S), std::invalid_argument);
}

TEST_CASE("witness subsets from non-negligibility") {
  auto w1 = witness_S(ctx, GN::make(ctx, "(pow eps 5)"));
  REQUIRE(w1.S.has_value());
  CHECK(*w1.exponent == 6);

  auto w2 = witness_S(ctx, GN::make(ctx, "(exp (neg (/ 1 eps)))"));
  CHECK(!w2.S.has_value());
  CHECK(w2.negligibility.proven());

  auto w3 = witness_S(ctx, GN::make(ctx, "(sin (/ 1 eps))"));
  REQUIRE(w3.S.has_value());
  GN osc = GN::make(ctx, "(sin (/ 1 eps))");
  auto samples = w3.S->collect(ctx.witness_grid().floor());
  for (double e : samples)
    CHECK(std::fabs(osc.net().fn(e)) >
          scalar_ops::pow_int(e, *w3.exponent));
}

TEST_CASE("proposition round-trip on the fixed corpus") {
  for (const auto& rep : corpus::proposition_nets()) {
    EpsNet net = EpsNet::from_expr(simplify(rep));
    auto w = witness_S(ctx, net);
    if (w.negligibility.proven()) {
      CHECK(!w.S.has_value());
      continue;
    }
    REQUIRE_MESSAGE(w.S.has_value(), print(rep));
    auto nz = strictly_nonzero_on(ctx, net, *w.S);
    CHECK_MESSAGE(nz.verdict.not_refuted(), print(rep));
    CHECK(nz.exponent.has_value());
  }
}

TEST_CASE("idempotent audit") {
  CHECK(idempotent_audit(ctx, GN::make(ctx, "1")).proven());
  CHECK(idempotent_audit(ctx, GN::make(ctx, "0")).proven());
  // eps is not idempotent: the precondition fails, audit not applicable
  Verdict na = idempotent_audit(ctx, GN::make(ctx, "eps"));
  CHECK(na.status == Status::Undetermined);
  CHECK(na.rule == "not-applicable");
  // a net that vanishes identically on the tested grid audits as 0
  Verdict z = idempotent_audit(ctx, GN::make(ctx, "(smoothstep (- 2 (/ 1 eps)))"));
  CHECK(z.proven());
}

TEST_CASE("sampler exhaustion is reported") {
  auto S = EpsSubset::from_samples({0.5, 0.25, 0.125});  // stops far above floor
  CHECK_THROWS_AS(S.collect(1e-12), std::runtime_error);
}
