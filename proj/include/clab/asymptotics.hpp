#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "clab/expr.hpp"
#include "clab/grid.hpp"
#include "clab/interval.hpp"
#include "clab/kernels.hpp"
#include "clab/verdict.hpp"

namespace clab {

// A scalar net over (0,1]: always evaluable, with the closed form attached
// when one exists (that is what the symbolic rules run on). Sup/inf nets
// tabulated by lattice sweeps are function-backed.
struct EpsNet {
  std::optional<Expr> sym;
  std::function<double(double)> fn;
  std::string label;

  static EpsNet from_expr(const Expr& e, std::string label = {});
  static EpsNet from_fn(std::function<double(double)> f, std::string label = {});

  double operator()(double eps) const { return fn(eps); }
  std::vector<double> values(std::span<const double> eps) const;

 private:
  std::shared_ptr<const kernels::BatchEval> batch_;
};

// Interval valuation: v(r) = sup{a : |r_eps| = O(eps^a)} is guaranteed to lie
// in [lo, hi] (extended reals). exact additionally means two-sided control
// |r| ~ eps^lo (with +inf = decays faster than every power, -inf = grows
// faster than every power).
struct Valuation {
  double lo;
  double hi;
  bool exact = false;
  Sign sign = Sign::Unknown;
  Ival range;  // over eps in [0, eps_hi]
};

// Recursive valuation rules for eps-only expressions. eps_hi bounds the
// interval analysis; verdicts only quote the asymptotic part.
// Throws ExprError if a spatial variable occurs.
Valuation symbolic_valuation(const Expr& eps_only, double eps_hi = 1.0 / 16);

struct AsymParams {
  int m_max = 12;     // negligibility test depth
  int n_max = 12;     // moderateness exponent cap
  double fit_floor = 1e-280;       // samples below this are treated as 0
  double tail_slack = 10.0;        // moderate-bound slack on the last decade
  double refute_margin = 2.0;      // strict-nonzero refutation margin
  double tol_eq = 1e-13;           // scale-relative floating-noise floor (eq)
};

struct FitResult {
  double slope = 0.0;
  double residual = 0.0;
  int used = 0;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Least squares of log|r| against log eps, ignoring samples below fit_floor.
// Throws FitError with fewer than 4 usable samples.
FitResult fit_order(const EpsNet& net, const EpsGrid& grid,
                    const AsymParams& params = {});

Verdict check_moderate(const EpsNet& net, const EpsGrid& grid,
                       const AsymParams& params = {});
Verdict check_negligible(const EpsNet& net, const EpsGrid& grid,
                         const AsymParams& params = {});

}  // namespace clab
