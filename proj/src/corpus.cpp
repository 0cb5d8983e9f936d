#include "clab/corpus.hpp"

#include <cmath>
#include <numbers>

namespace clab::corpus {

namespace {
Expr pick(std::mt19937_64& rng, std::span<const Expr> pool) {
  return pool[rng() % pool.size()];
}
}  // namespace

std::vector<Expr> random_gn_reps(std::mt19937_64& rng, int count) {
  const Expr inv_eps = c_int(1) / Expr::eps();
  std::vector<Expr> bounded = {
      c_int(1),
      Expr::unary(Op::Sin, inv_eps),
      Expr::unary(Op::Cos, inv_eps),
      c_int(2) + Expr::unary(Op::Sin, inv_eps),
      smoothstep(Expr::unary(Op::Sin, inv_eps)),
      Expr::unary(Op::Atan, inv_eps),
  };
  std::vector<Expr> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    int p = static_cast<int>(rng() % 7) - 3;  // eps^p, p in -3..3
    Expr e = p == 0 ? c_int(1) : eps_pow(Rational(p));
    e = e * pick(rng, bounded);
    if (rng() % 3 == 0) e = e + Expr::unary(Op::Exp, -inv_eps);
    if (rng() % 4 == 0)
      e = Expr::constant(Rational(static_cast<std::int64_t>(rng() % 7) + 1,
                                  static_cast<std::int64_t>(rng() % 3) + 1)) *
          e;
    out.push_back(simplify(e));
  }
  return out;
}

std::vector<Expr> random_gf_reps(std::mt19937_64& rng, int count) {
  const Expr x = Expr::var(1);
  std::vector<Expr> spatial = {
      x,
      Expr::unary(Op::Sin, x),
      Expr::unary(Op::Cos, x),
      c_int(2) + Expr::unary(Op::Sin, x),
      Expr::pow(x, Rational(2)),
      c_int(1) + Expr::pow(x, Rational(3)) * c_rat(1, 4),
      Expr::unary(Op::Atan, x),
  };
  std::vector<Expr> out;
  for (int i = 0; i < count; ++i) {
    Expr e = pick(rng, spatial);
    if (rng() % 2) e = e * pick(rng, spatial);
    int p = static_cast<int>(rng() % 5) - 2;
    if (p != 0) e = e * eps_pow(Rational(p));
    if (rng() % 3 == 0)
      e = e + Expr::unary(Op::Exp, -(c_int(1) / Expr::eps()));
    out.push_back(simplify(e));
  }
  return out;
}

std::vector<Expr> proposition_nets() {
  std::vector<const char*> texts = {
      // powers
      "1", "eps", "(pow eps 2)", "(pow eps 3)", "(pow eps 5)", "(pow eps 11)",
      "(pow eps -1)", "(pow eps -3)", "(pow eps 1/2)", "(pow eps 7/2)",
      // exp(+-1/eps) and relatives
      "(exp (neg (/ 1 eps)))", "(exp (/ 1 eps))",
      "(exp (neg (pow eps -2)))", "(* (pow eps -3) (exp (neg (/ 1 eps))))",
      "(exp (neg (/ 2 eps)))", "(flatexp eps 2)",
      // bounded oscillators
      "(sin (/ 1 eps))", "(cos (/ 1 eps))", "(+ 2 (sin (/ 1 eps)))",
      "(atan (/ 1 eps))", "(smoothstep (sin (/ 1 eps)))",
      // products and sums
      "(* (pow eps 2) (sin (/ 1 eps)))", "(* (pow eps -2) (sin (/ 1 eps)))",
      "(* (pow eps 3) (+ 2 (cos (/ 1 eps))))",
      "(+ eps (exp (neg (/ 1 eps))))", "(+ (pow eps 2) (pow eps 5))",
      "(* 3/2 (pow eps 4))", "(+ 1 eps)", "(- (pow eps 2) (pow eps 3))",
      "(* (sin (/ 1 eps)) (cos (/ 1 eps)))",
      "(* (pow eps 6) (atan (/ 1 eps)))",
      "(+ (exp (neg (/ 1 eps))) (exp (neg (pow eps -2))))",
      "(* eps (+ 2 (sin (/ 1 eps))))",
      "(* (pow eps -1) (+ 3 (cos (/ 1 eps))))",
      "(pow (+ 1 eps) 3)", "(* (pow eps 9) (sin (/ 1 eps)))",
      "(* 2 (exp (neg (/ 1 eps))))", "(+ (pow eps 11) (exp (neg (/ 1 eps))))",
      "(* (pow eps 1/2) (+ 2 (sin (/ 1 eps))))", "0",
  };
  std::vector<Expr> out;
  for (auto* t : texts) out.push_back(parse(t));
  return out;
}

DomainSpec standard_domain() { return DomainSpec::box({-2.0}, {2.0}); }

std::vector<GfFixture> invertibility_fixtures() {
  std::vector<GfFixture> out;
  auto inv = [&](const char* name, const char* rep) {
    out.push_back({name, parse(rep), true});
  };
  auto no = [&](const char* name, const char* rep) {
    out.push_back({name, parse(rep), false});
  };
  inv("2+sin(x)", "(+ 2 (sin x1))");
  inv("3+cos(2x)", "(+ 3 (cos (* 2 x1)))");
  inv("1+x^2", "(+ 1 (pow x1 2))");
  inv("exp(x)", "(exp x1)");
  inv("eps", "eps");
  inv("eps^2*(2+sin x)", "(* (pow eps 2) (+ 2 (sin x1)))");
  inv("2+sin(x)+eps", "(+ (+ 2 (sin x1)) eps)");
  inv("5/eps", "(* 5 (pow eps -1))");
  inv("2+cos(x/4)... via cos(x)/4", "(+ 2 (* 1/4 (cos x1)))");
  inv("(1+x^2)(2+sin(1/eps))", "(* (+ 1 (pow x1 2)) (+ 2 (sin (/ 1 eps))))");
  no("x", "x1");
  no("x^3", "(pow x1 3)");
  no("sin(x)", "(sin x1)");
  no("x^2", "(pow x1 2)");
  no("eps*x", "(* eps x1)");
  no("x+exp(-1/eps)", "(+ x1 (exp (neg (/ 1 eps))))");
  no("heaviside-model", "(smoothstep (/ x1 eps))");
  no("sin(2x)", "(sin (* 2 x1))");
  no("x(1+x^2)", "(* x1 (+ 1 (pow x1 2)))");
  no("x*(2+sin(1/eps))", "(* x1 (+ 2 (sin (/ 1 eps))))");
  return out;
}

std::vector<GeneralizedPoint> random_points(const Context& ctx,
                                            const DomainSpec& dom,
                                            std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Box bounding = dom.bounding();
  std::vector<GeneralizedPoint> out;
  for (int i = 0; i < count; ++i) {
    GeneralizedPoint p;
    for (int d = 0; d < dom.dim; ++d) {
      std::size_t u = static_cast<std::size_t>(d);
      double w = bounding.hi[u] - bounding.lo[u];
      double base = bounding.lo[u] + (0.25 + 0.5 * unit(rng)) * w;
      double a = 0.1 * w * (2.0 * unit(rng) - 1.0);
      Expr comp = const_from_double(base) + const_from_double(a) * Expr::eps();
      if (rng() % 3 == 0)
        comp = comp + const_from_double(0.05 * w * (2.0 * unit(rng) - 1.0)) *
                          eps_pow(Rational(2));
      if (rng() % 4 == 0)
        comp = comp + Expr::unary(Op::Exp, -(c_int(1) / Expr::eps()));
      p.comps.push_back(comp);
      double slack = (std::fabs(a) + 0.05 * w) * ctx.grid.largest() + 1e-9;
      p.support.lo.push_back(base - slack);
      p.support.hi.push_back(base + slack);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<MapFixture> map_fixtures(const Context& ctx,
                                     std::mt19937_64& rng) {
  std::vector<MapFixture> out;
  auto pair1d = [&](const char* name, DomainSpec oy, DomainSpec ox,
                    const char* fwd, const char* bwd) {
    CBoundedMap f = CBoundedMap::make(ctx, oy, ox, {parse(fwd)});
    CBoundedMap b = CBoundedMap::make(ctx, ox, oy, {parse(bwd)});
    out.push_back({name, std::move(f), std::move(b)});
  };

  // Invertible fixtures (exact two-sided inverses, onto targets).
  pair1d("shift", DomainSpec::box({-2}, {2}), DomainSpec::box({-1}, {3}),
         "(+ x1 1)", "(- x1 1)");
  pair1d("scale", DomainSpec::box({-1}, {1}), DomainSpec::box({-2}, {2}),
         "(* 2 x1)", "(* 1/2 x1)");
  pair1d("exp/log", DomainSpec::box({-1}, {1}),
         DomainSpec::box({0.36787944117144233}, {2.718281828459045}),
         "(exp x1)", "(log x1)");
  pair1d("atan/tan", DomainSpec::box({-1}, {1}),
         DomainSpec::box({-0.7853981633974483}, {0.7853981633974483}),
         "(atan x1)", "(/ (sin x1) (cos x1))");
  {
    auto oy = DomainSpec::box({-1, -1}, {1, 1});
    auto ox = DomainSpec::box({-2, -3}, {2, 3});
    CBoundedMap f = CBoundedMap::make(ctx, oy, ox,
                                      {parse("(* 2 x1)"), parse("(* 3 x2)")});
    CBoundedMap b = CBoundedMap::make(
        ctx, ox, oy, {parse("(* 1/2 x1)"), parse("(* 1/3 x2)")});
    out.push_back({"diag-2d", std::move(f), std::move(b)});
  }

  // Shift by eps (invertible pair; the asymmetric target keeps both legs
  // c-bounded: K_j + eps needs room above, K_j - eps room below).
  pair1d("shift-eps", DomainSpec::box({-2.0}, {2.0}),
         DomainSpec::box({-1.9}, {2.0}), "(+ x1 eps)", "(- x1 eps)");

  // Non-invertible (or not-inverted) c-bounded maps, seeded.
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto oy = standard_domain();
  auto ox = DomainSpec::box({-4.0}, {4.0});
  std::vector<Expr> cores = {
      parse("(pow x1 2)"),
      parse("(sin x1)"),
      parse("(* x1 (cos x1))"),
      parse("(atan x1)"),
      parse("(+ x1 (* eps (sin x1)))"),
      parse("(* 1/2 (pow x1 3))"),
  };
  int made = static_cast<int>(out.size());
  for (int i = made; i < 30; ++i) {
    Expr core = cores[rng() % cores.size()];
    double s = 0.4 + 0.3 * std::fabs(unit(rng));
    double t = 0.5 * unit(rng);
    Expr rep = const_from_double(s) * core + const_from_double(t);
    if (rng() % 3 == 0) rep = rep + const_from_double(0.25 * unit(rng)) * Expr::eps();
    out.push_back({"seeded-" + std::to_string(i),
                   CBoundedMap::make(ctx, oy, ox, {simplify(rep)}),
                   std::nullopt});
  }
  return out;
}

std::vector<TorusDiffeo> diffeo_corpus(const Context& ctx,
                                       const TorusModel& m) {
  const double tau = 2.0 * std::numbers::pi;
  std::vector<TorusDiffeo> out;
  // Rotations by lattice-aligned angles.
  for (int steps : {64, 128, 256, 3}) {
    double a = tau * steps / m.lattice_n;
    out.push_back(TorusDiffeo::make(ctx, m, 1, const_from_double(a)));
  }
  // theta + b sin(theta).
  for (const char* b : {"1/10", "3/10", "3/5"}) {
    out.push_back(TorusDiffeo::make(
        ctx, m, 1, Expr::constant(Rational(parse(b).value())) *
                       Expr::unary(Op::Sin, Expr::var(1))));
  }
  out.push_back(TorusDiffeo::make(ctx, m, 1,
                                  parse("(* 1/5 (sin (* 2 x1)))")));
  out.push_back(TorusDiffeo::make(
      ctx, m, 1, parse("(+ (* 1/10 (sin x1)) (* 1/20 (cos (* 2 x1))))")));
  out.push_back(TorusDiffeo::make(ctx, m, -1, c_int(0)));  // reflection
  return out;
}

std::vector<TorusFun> norm_corpus(const TorusModel& m, std::mt19937_64& rng,
                                  int count, int max_harmonic) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TorusFun> out;
  for (int i = 0; i < count; ++i) {
    Expr acc = const_from_double(2.0 * unit(rng));
    for (int k = 1; k <= max_harmonic; ++k) {
      double a = unit(rng);
      if (a < 0.15) continue;  // sparse harmonics
      acc = acc + const_from_double(a) *
                      Expr::unary(Op::Cos, c_int(k) * Expr::var(1));
    }
    out.push_back(TorusFun::from_expr(m, simplify(acc)));
  }
  return out;
}

}  // namespace clab::corpus
