#include <doctest.h>

#include <cstring>
#include <random>

#include "clab/kernels.hpp"

using namespace clab;

namespace {

Expr random_kernel_expr(std::mt19937_64& rng, int depth) {
  auto coin = [&](int n) { return static_cast<int>(rng() % n); };
  if (depth <= 0) {
    switch (coin(3)) {
      case 0: return Expr::eps();
      case 1: return Expr::var(1 + coin(2));
      default: return c_rat(static_cast<int>(rng() % 11) - 5, 1 + coin(4));
    }
  }
  Expr a = random_kernel_expr(rng, depth - 1);
  Expr b = random_kernel_expr(rng, depth - 1);
  switch (coin(12)) {
    case 0: return a + b;
    case 1: return a - b;
    case 2: return a * b;
    case 3: return a / (c_int(3) + Expr::unary(Op::Cos, b));
    case 4: return -a;
    case 5: return Expr::unary(Op::Sin, a);
    case 6: return Expr::unary(Op::Atan, a);
    case 7: return Expr::unary(Op::Abs, a);
    case 8: return smoothstep(a);
    case 9: return Expr::flatexp(a, coin(3));
    case 10: return Expr::pow(Expr::unary(Op::Abs, a) + c_int(1), Rational(1, 2));
    default: return Expr::pow(a, Rational(coin(5)));
  }
}

}  // namespace

TEST_CASE("scalar kernel agrees bit-for-bit with the tree evaluator") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> xs(-2.0, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    Expr e = random_kernel_expr(rng, 4);
    kernels::BatchEval be(e);
    const std::size_t n = 17;
    std::vector<double> eps(n), x1(n), x2(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
      eps[i] = 0.1 + 0.8 * (static_cast<double>(i) + 1) / n;
      x1[i] = xs(rng);
      x2[i] = xs(rng);
    }
    std::vector<const double*> vars{x1.data(), x2.data()};
    std::vector<std::uint8_t> scal{0, 0};
    kernels::scalar_kernel().fn(be.tape(), n, eps.data(), false, vars.data(),
                                scal.data(), out.data());
    for (std::size_t i = 0; i < n; ++i) {
      VarBinding b{eps[i], {x1[i], x2[i]}};
      double tree;
      try {
        tree = evaluate(e, b);
      } catch (const EvalError&) {
        continue;  // kernels encode domain failures as NaN/Inf instead
      }
      CHECK(std::memcmp(&tree, &out[i], sizeof(double)) == 0);
    }
  }
}

TEST_CASE("SIMD kernel is bit-identical to the scalar kernel") {
  const kernels::Kernel* simd = kernels::simd_kernel();
  if (!simd) {
    MESSAGE("SIMD kernel unavailable on this machine; skipping");
    return;
  }
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> xs(-3.0, 3.0);
  for (int trial = 0; trial < 120; ++trial) {
    Expr e = random_kernel_expr(rng, 4);
    kernels::BatchEval be(e);
    const std::size_t n = 37;  // odd: exercises the remainder path
    std::vector<double> eps(n), x1(n), x2(n);
    for (std::size_t i = 0; i < n; ++i) {
      eps[i] = 0.05 + 0.9 * (static_cast<double>(i) + 1) / n;
      x1[i] = xs(rng);
      x2[i] = xs(rng);
    }
    std::vector<const double*> vars{x1.data(), x2.data()};
    std::vector<std::uint8_t> scal{0, 0};
    std::vector<double> a(n), b(n);
    kernels::scalar_kernel().fn(be.tape(), n, eps.data(), false, vars.data(),
                                scal.data(), a.data());
    simd->fn(be.tape(), n, eps.data(), false, vars.data(), scal.data(),
             b.data());
    CHECK(std::memcmp(a.data(), b.data(), n * sizeof(double)) == 0);
  }
}

TEST_CASE("broadcast inputs match per-lane inputs") {
  Expr e = parse("(+ (* x1 x1) (sin (/ x2 eps)))");
  kernels::BatchEval be(e);
  const std::size_t n = 9;
  std::vector<double> x1(n, 0.75), x2(n);
  for (std::size_t i = 0; i < n; ++i) x2[i] = 0.1 * static_cast<double>(i);
  double eps = 0.25;
  double x1s = 0.75;
  std::vector<double> full(n), broad(n);
  {
    std::vector<const double*> vars{x1.data(), x2.data()};
    std::vector<std::uint8_t> scal{0, 0};
    kernels::active_kernel().fn(be.tape(), n, &eps, true, vars.data(),
                                scal.data(), full.data());
  }
  {
    std::vector<const double*> vars{&x1s, x2.data()};
    std::vector<std::uint8_t> scal{1, 0};
    kernels::active_kernel().fn(be.tape(), n, &eps, true, vars.data(),
                                scal.data(), broad.data());
  }
  CHECK(std::memcmp(full.data(), broad.data(), n * sizeof(double)) == 0);
}

TEST_CASE("tape CSE reuses shared subtrees") {
  // (s(x)+1)*(s(x)+2) with s(x) shared: the tape must be smaller than the
  // naive node count.
  Expr s = smoothstep(Expr::var(1) * c_rat(1, 2));
  Expr e = (s + c_int(1)) * (s + c_int(2));
  Tape t = Tape::compile(e);
  CHECK(t.code().size() < e.size());
  kernels::BatchEval be(e);
  std::vector<double> x{0.8};
  std::vector<std::vector<double>> coords{x};
  double out = 0;
  be.eval_lattice(0.5, coords, 1, &out);
  VarBinding b{0.5, {0.8}};
  CHECK(out == evaluate(e, b));
}

TEST_CASE("register recycling keeps slot counts small") {
  // A long additive chain should run in O(1) live registers.
  Expr acc = Expr::var(1);
  for (int i = 0; i < 64; ++i)
    acc = acc + Expr::unary(Op::Sin, acc) * c_rat(1, 7);
  Tape t = Tape::compile(acc);
  CHECK(t.slot_count() <= 8);
}
