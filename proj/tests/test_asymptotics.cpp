#include <doctest.h>

#include <cmath>

#include "clab/asymptotics.hpp"
#include "clab/corpus.hpp"

using namespace clab;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

Valuation val_of(const char* s) {
  return symbolic_valuation(simplify(parse(s)));
}
}  // namespace

TEST_CASE("symbolic valuation rules") {
  auto v1 = val_of("(pow eps -3)");
  CHECK(v1.lo == -3.0);
  CHECK(v1.hi == -3.0);
  CHECK(v1.exact);

  CHECK(val_of("(exp (neg (/ 1 eps)))").lo == kInf);
  CHECK(val_of("(exp (/ 1 eps))").hi == -kInf);

  auto osc = val_of("(sin (/ 1 eps))");
  CHECK(osc.lo == 0.0);
  CHECK(osc.hi == kInf);

  // evaluation oracle for the oscillator's lower order: |sin(1/eps)| = 1
  // exactly along eps_k = 1/(pi/2 + 2 pi k)
  EpsNet net = EpsNet::from_expr(parse("(sin (/ 1 eps))"));
  for (int k = 1; k <= 20; ++k) {
    double eps = 1.0 / (M_PI / 2 + 2 * M_PI * k);
    CHECK(std::fabs(net.fn(eps)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  CHECK(val_of("(+ (pow eps 2) eps)").lo == 1.0);
  CHECK(val_of("(exp (sin (/ 1 eps)))").lo == 0.0);
  CHECK(val_of("(exp (sin (/ 1 eps)))").hi == 0.0);
  // sum with possible cancellation keeps hi at +inf
  auto cancel = val_of("(- (sin (/ 1 eps)) (cos (/ 1 eps)))");
  CHECK(cancel.hi == kInf);
}

TEST_CASE("fit_order on closed forms") {
  EpsGrid g;
  auto f1 = fit_order(EpsNet::from_expr(parse("(pow eps 2)")), g);
  CHECK(f1.slope == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f1.residual <= 1e-9);

  auto f2 = fit_order(EpsNet::from_expr(parse("1")), g);
  CHECK(f2.slope == doctest::Approx(0.0).epsilon(1e-12));

  auto f3 = fit_order(
      EpsNet::from_expr(parse("(* (pow eps -3) (+ 2 (sin (/ 1 eps))))")), g);
  CHECK(f3.slope >= -3.2);
  CHECK(f3.slope <= -2.8);
  CHECK(f3.residual > 0.05);  // oscillation leaves a large residual

  CHECK_THROWS_AS(fit_order(EpsNet::from_expr(parse("0")), g), FitError);
}

TEST_CASE("moderate / negligible deciders") {
  EpsGrid g;
  AsymParams p;
  auto mod = [&](const char* s) {
    return check_moderate(EpsNet::from_expr(simplify(parse(s))), g, p);
  };
  auto neg = [&](const char* s) {
    return check_negligible(EpsNet::from_expr(simplify(parse(s))), g, p);
  };

  CHECK(neg("(exp (neg (/ 1 eps)))").proven());
  CHECK(mod("(exp (/ 1 eps))").refuted());
  CHECK(mod("(sin (/ 1 eps))").proven());
  auto nr = neg("(sin (/ 1 eps))");
  CHECK(nr.refuted());
  CHECK(!nr.witnesses.empty());
  // the witness really does violate the claimed bound
  EpsNet osc = EpsNet::from_expr(parse("(sin (/ 1 eps))"));
  CHECK(std::fabs(osc.fn(nr.witnesses[0].eps)) >
        scalar_ops::pow_int(nr.witnesses[0].eps, *nr.exponent));

  CHECK(mod("(pow eps 13)").proven());
  CHECK(neg("(pow eps 13)").refuted());  // hi = 13 < inf refutes symbolically
  CHECK(neg("(* (sin (/ 1 eps)) (exp (neg (/ 1 eps))))").proven());
}

TEST_CASE("soundness: grids never contradict the symbolic lower bound") {
  EpsGrid g;
  std::mt19937_64 rng(31337);
  auto corpus = corpus::random_gn_reps(rng, 60);
  auto eps = g.samples();
  for (const auto& e : corpus) {
    Valuation v = symbolic_valuation(e, g.largest());
    if (!std::isfinite(v.lo)) continue;
    auto vals = EpsNet::from_expr(e).values(eps);
    // calibrate C on the largest-eps decade
    double c = 0;
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (eps[i] >= g.largest() / 10.0)
        c = std::max(c, std::fabs(vals[i]) / std::pow(eps[i], v.lo));
    for (std::size_t i = 0; i < eps.size(); ++i) {
      CHECK(std::fabs(vals[i]) <=
            (c + 1.0) * std::pow(eps[i], v.lo - 0.1) + 1e-300);
    }
  }
}

TEST_CASE("negligible Proven implies moderate Proven") {
  EpsGrid g;
  AsymParams p;
  std::mt19937_64 rng(555);
  auto corpus = corpus::random_gn_reps(rng, 40);
  corpus.push_back(parse("(exp (neg (/ 1 eps)))"));
  corpus.push_back(parse("(* (pow eps 4) (exp (neg (/ 1 eps))))"));
  for (const auto& e : corpus) {
    EpsNet n = EpsNet::from_expr(simplify(e));
    if (check_negligible(n, g, p).proven()) {
      CHECK(check_moderate(n, g, p).proven());
    }
  }
}

TEST_CASE("verdicts are deterministic across runs") {
  EpsGrid g;
  AsymParams p;
  EpsNet n = EpsNet::from_expr(parse("(* (pow eps -2) (sin (/ 1 eps)))"));
  auto a = check_negligible(n, g, p);
  auto b = check_negligible(n, g, p);
  CHECK(a.to_json() == b.to_json());
}
