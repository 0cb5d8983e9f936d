#include <doctest.h>

#include <cmath>
#include <random>

#include "clab/expr.hpp"

using namespace clab;

namespace {

// Random smooth-fragment expressions in (eps, x1) with domains that stay safe
// on interior bindings: denominators bounded away from zero, log arguments
// positive, pow bases positive.
Expr random_smooth(std::mt19937_64& rng, int depth) {
  auto coin = [&](int n) { return static_cast<int>(rng() % n); };
  if (depth <= 0) {
    switch (coin(4)) {
      case 0: return Expr::eps();
      case 1: return Expr::var(1);
      case 2: return c_rat(static_cast<int>(rng() % 9) - 4, 1 + coin(3));
      default: return c_int(1) + Expr::var(1) * c_rat(1, 2);
    }
  }
  Expr a = random_smooth(rng, depth - 1);
  Expr b = random_smooth(rng, depth - 1);
  switch (coin(9)) {
    case 0: return a + b;
    case 1: return a - b;
    case 2: return a * b;
    case 3: return a / (c_int(3) + Expr::unary(Op::Sin, b));  // |den| >= 2
    case 4: return Expr::unary(Op::Sin, a);
    case 5: return Expr::unary(Op::Cos, a);
    case 6: return Expr::unary(Op::Atan, a);
    case 7: return smoothstep(a);
    default: return Expr::pow(c_int(2) + Expr::unary(Op::Cos, a), Rational(2));
  }
}

double central_fd(const Expr& e, VarBinding b, int v, double h) {
  VarBinding bp = b, bm = b;
  if (v == 0) {
    bp.eps += h;
    bm.eps -= h;
  } else {
    bp.coords[static_cast<std::size_t>(v - 1)] += h;
    bm.coords[static_cast<std::size_t>(v - 1)] -= h;
  }
  return (evaluate(e, bp) - evaluate(e, bm)) / (2 * h);
}

}  // namespace

TEST_CASE("parse/print round-trips structurally") {
  const char* corpus[] = {
      "(* eps eps)",
      "(smoothstep (/ x1 eps))",
      "(+ (pow eps -3) (sin (/ 1 eps)))",
      "(pow x1 3/2)",
      "(flatexp (- 1 x1) 2)",
      "(- (neg x2) 7/3)",
      "(atan (log (+ 2 (cos x1))))",
  };
  for (const char* t : corpus) {
    Expr e = parse(t);
    Expr r = parse(print(e));
    CHECK(equal(e, r));
  }
}

TEST_CASE("parse reports errors with byte offsets") {
  CHECK_THROWS_AS(parse("(pow -1.0 0.5)"), ParseError);
  CHECK_THROWS_AS(parse("(+ eps)"), ParseError);       // arity
  CHECK_THROWS_AS(parse("(frob eps 1)"), ParseError);  // unknown op
  CHECK_THROWS_AS(parse("(pow eps x1)"), ParseError);  // non-constant exponent
  try {
    parse("  (boom eps)");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.offset == 2);
  }
}

TEST_CASE("evaluation basics") {
  VarBinding b{0.5, {}};
  CHECK(evaluate(parse("(* eps eps)"), b) == 0.25);
  VarBinding t1{1.0, {-1.0}};
  VarBinding t2{1.0, {2.0}};
  CHECK(evaluate(parse("(smoothstep x1)"), t1) == 0.0);
  CHECK(evaluate(parse("(smoothstep x1)"), t2) == 1.0);
  VarBinding s{0.1, {}};
  CHECK(evaluate(parse("(exp (neg (/ 1 eps)))"), s) ==
        doctest::Approx(4.5399929762484854e-05).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate(parse("(log (neg 1))"), b), EvalError);
  CHECK_THROWS_AS(evaluate(parse("(/ 1 (- eps eps))"), b), EvalError);
}

TEST_CASE("differentiation matches the finite-difference oracle") {
  // d/dx1 x1^2 = 2 x1
  Expr d = differentiate(parse("(pow x1 2)"), 1);
  Expr expect = simplify(parse("(* 2 x1)"));
  CHECK(equal(simplify(d), expect));

  // smoothstep derivative at 1/2: frozen against the central-difference
  // oracle (step 1e-6), which gives 2.0 under this smoothstep definition.
  Expr ss = parse("(smoothstep x1)");
  Expr dss = differentiate(ss, 1);
  VarBinding half{1.0, {0.5}};
  double fd = central_fd(ss, half, 1, 1e-6);
  double sym = evaluate(dss, half);
  CHECK(sym == doctest::Approx(fd).epsilon(1e-8));
  CHECK(sym == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(differentiate(parse("(abs (sin (/ 1 eps)))"), 0),
                  NonSmoothError);
  // abs not depending on the variable differentiates to zero
  Expr mixed = parse("(+ x1 (abs (sin (/ 1 eps))))");
  CHECK(equal(simplify(differentiate(mixed, 1)), c_int(1)));
}

TEST_CASE("200 random smooth expressions pass the derivative property") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> xs(-0.9, 0.9);
  std::uniform_real_distribution<double> es(0.3, 0.9);
  int checked = 0;
  while (checked < 200) {
    Expr e = random_smooth(rng, 3);
    for (int v : {0, 1}) {
      if (!e.depends_on(v)) continue;
      VarBinding b{es(rng), {xs(rng)}};
      double sym = 0, fd = 0;
      try {
        Expr d = differentiate(e, v);
        sym = evaluate(d, b);
        fd = central_fd(e, b, v, 1e-6);
      } catch (const ExprError&) {
        continue;  // rare domain trouble; the generator is probabilistic
      }
      if (!std::isfinite(sym) || !std::isfinite(fd)) continue;
      CHECK(std::fabs(sym - fd) <= 1e-5 * (1.0 + std::fabs(fd)));
      ++checked;
    }
  }
}

TEST_CASE("simplify: exact identities are 0-ulp") {
  const char* pairs[][2] = {
      {"(+ (sin x1) 0)", "(sin x1)"},
      {"(* 1 eps)", "eps"},
      {"(pow eps 1)", "eps"},
      {"(neg (neg (cos x1)))", "(cos x1)"},
      {"(abs (neg (+ 2 (sin x1))))", "(abs (+ 2 (sin x1)))"},
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> xs(-1.0, 1.0);
  for (auto& p : pairs) {
    Expr a = simplify(parse(p[0]));
    Expr b = simplify(parse(p[1]));
    CHECK(equal(a, b));
    for (int i = 0; i < 10; ++i) {
      VarBinding bind{0.25, {xs(rng)}};
      CHECK(evaluate(a, bind) == evaluate(parse(p[0]), bind));
    }
  }
}

TEST_CASE("simplify cancellations and constant folding") {
  CHECK(equal(simplify(parse("(+ eps (neg eps))")), c_int(0)));
  CHECK(equal(simplify(parse("(* (pow eps -1) eps)")), c_int(1)));
  CHECK(equal(simplify(parse("(- (* 3 (sin x1)) (* 3 (sin x1)))")), c_int(0)));
  CHECK(equal(simplify(parse("(pow (pow x1 2) 3)")), parse("(pow x1 6)")));
  CHECK(equal(simplify(parse("(* 2/3 3/2)")), c_int(1)));
  // (x^2)^(1/2) must NOT collapse to x (sign loss)
  Expr tricky = simplify(parse("(pow (pow x1 2) 1/2)"));
  VarBinding neg1{1.0, {-2.0}};
  CHECK(evaluate(tricky, neg1) == 2.0);
}

TEST_CASE("simplify preserves evaluation on a random corpus") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> xs(-0.9, 0.9);
  for (int i = 0; i < 120; ++i) {
    Expr e = random_smooth(rng, 3);
    Expr s = simplify(e);
    VarBinding b{0.5, {xs(rng)}};
    double v0 = evaluate(e, b);
    double v1 = evaluate(s, b);
    CHECK(std::fabs(v1 - v0) <= 1e-14 * (1.0 + std::fabs(v0)));
    // print/parse identity on the same corpus
    CHECK(equal(parse(print(e)), e));
  }
}

TEST_CASE("substitution composes representatives") {
  Expr u = parse("(pow x1 2)");
  std::vector<Expr> subs{parse("(+ 1 eps)")};
  Expr c = substitute_vars(u, subs);
  CHECK(equal(c, parse("(pow (+ 1 eps) 2)")));
  VarBinding b{0.25, {}};
  CHECK(evaluate(c, b) == doctest::Approx(1.5625));
}

TEST_CASE("flatexp family closes under differentiation") {
  Expr h1 = Expr::flatexp(Expr::var(1), 1);
  Expr d = simplify(differentiate(h1, 1));
  // d/dt h_1 = h_3 - h_2; check numerically at several points
  for (double t : {0.3, 0.7, 1.5, -0.2}) {
    VarBinding b{1.0, {t}};
    double fd = central_fd(h1, b, 1, 1e-7);
    CHECK(evaluate(d, b) == doctest::Approx(fd).epsilon(1e-5));
  }
  // flat at zero from the right
  VarBinding z{1.0, {1e-4}};
  CHECK(evaluate(d, z) == doctest::Approx(0.0).epsilon(1e-30));
}
