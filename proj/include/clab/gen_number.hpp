#pragma once

#include <memory>
#include <mutex>
#include <optional>

#include "clab/asymptotics.hpp"

namespace clab {

// Shared knobs for grids, thresholds and lattice resolution.
struct Context {
  EpsGrid grid{};
  AsymParams asym{};
  int lattice_intervals = 64;  // per axis, n <= 2 (16 for n = 3)
  int witness_k_max = 64;      // witness collection digs deeper than the grid
  int derivative_cap = 4;      // max |alpha| tested by the moderateness sweep

  EpsGrid witness_grid() const { return grid.deepened(witness_k_max); }
};

// A parameter subset S of (0,1] with 0 in its closure: a strictly decreasing
// sampler plus a membership predicate.
struct EpsSubset {
  std::function<std::optional<double>(int)> sample;
  std::function<bool(double)> member;
  std::string label;

  static EpsSubset whole_interval(const EpsGrid& grid);
  static EpsSubset from_samples(std::vector<double> samples);

  // First samples, descending, down to eps_floor. Throws if the sampler is
  // exhausted before reaching the floor with at least 4 samples.
  std::vector<double> collect(double eps_floor, int max_count = 64) const;
};

// Element of the generalized-number ring: a moderate eps-only representative
// plus write-once classification caches. Constructors reject representatives
// whose moderateness is Refuted.
class GeneralizedNumber {
 public:
  static GeneralizedNumber make(const Context& ctx, Expr rep);
  static GeneralizedNumber make(const Context& ctx, const std::string& text) {
    return make(ctx, parse(text));
  }
  // For nets whose closed form is partial at isolated points (the S-inverse
  // chi/r construction): rep is the formal representative, net the guarded
  // total evaluation.
  static GeneralizedNumber make_guarded(const Context& ctx, Expr rep,
                                        EpsNet net);

  const Expr& rep() const { return rep_; }
  const EpsNet& net() const { return net_; }

  Verdict moderate(const Context& ctx) const;
  Verdict negligible(const Context& ctx) const;

 private:
  GeneralizedNumber(Expr rep, EpsNet net)
      : rep_(std::move(rep)), net_(std::move(net)),
        cache_(std::make_shared<Cache>()) {}

  struct Cache {
    std::mutex mu;
    std::optional<Verdict> moderate, negligible;
  };

  Expr rep_;
  EpsNet net_;
  std::shared_ptr<Cache> cache_;
};

using GN = GeneralizedNumber;

GN gn_add(const Context& ctx, const GN& a, const GN& b);
GN gn_sub(const Context& ctx, const GN& a, const GN& b);
GN gn_mul(const Context& ctx, const GN& a, const GN& b);
GN gn_scale(const Context& ctx, const GN& a, const Rational& c);

// Equality in the quotient: the difference is negligible. Exact routes first
// (simplify, then distributive normal form); a scale-relative floating-noise
// floor absorbs IEEE rounding before the strict grid bounds run.
Verdict gn_eq(const Context& ctx, const GN& a, const GN& b);

// Distributive normal form comparison used by gn_eq; exposed for tests.
// Returns true when a - b normalizes to the zero polynomial over
// multiplicative cores (exact rational arithmetic, size-capped).
bool normalizes_to_zero(const Expr& a, const Expr& b);

struct NonzeroResult {
  Verdict verdict;
  std::optional<int> exponent;  // m with |r_eps| > eps^m on sampled S tail
  double tail_start = 1.0;      // the certified statement holds below this
};

NonzeroResult strictly_nonzero_on(const Context& ctx, const EpsNet& net,
                                  const EpsSubset& S);
inline NonzeroResult strictly_nonzero_on(const Context& ctx, const GN& r,
                                         const EpsSubset& S) {
  return strictly_nonzero_on(ctx, r.net(), S);
}

struct SInverseResult {
  GN s;        // chi(eps)/r_eps, extended by 0 where chi vanishes
  GN rprime;   // r*s == chi by construction
  int m = 0;
  Verdict contract;  // r|S = 1 and |s| <= eps^-(m+1)(1+margin), sampled
};

SInverseResult s_inverse(const Context& ctx, const GN& r, const EpsSubset& S);
// Representative-level variant: the input need not be moderate (the
// correspondence also makes sense for raw nets); s and rprime still are.
SInverseResult s_inverse_net(const Context& ctx, const Expr& rep,
                             const EpsSubset& S);

struct WitnessSResult {
  Verdict negligibility;
  std::optional<EpsSubset> S;   // present iff negligibility Refuted
  std::optional<int> exponent;  // the M with |r| > eps^M along S
};

// Both directions of the nonzero <-> S-invertible correspondence: negligible
// nets get no S; otherwise S is built from grid witnesses.
WitnessSResult witness_S(const Context& ctx, const EpsNet& net);
inline WitnessSResult witness_S(const Context& ctx, const GN& r) {
  return witness_S(ctx, r.net());
}

// Falsification probe for nontrivial idempotents (there should be none).
// Precondition gn_eq(r^2, r) not Refuted; then asserts r ~ 0 or r ~ 1.
Verdict idempotent_audit(const Context& ctx, const GN& r);

}  // namespace clab
