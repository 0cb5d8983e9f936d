#pragma once

#include "clab/gen_function.hpp"

namespace clab {

// c-bounded generalized map phi: Omega_Y -> Omega_X, given by n_X component
// functions on Omega_Y. Construction runs the c-boundedness check and rejects
// Refuted maps.
struct CBoundedMap {
  DomainSpec source;  // Omega_Y
  DomainSpec target;  // Omega_X
  std::vector<GF> comps;
  Verdict c_bounded;

  static CBoundedMap make(const Context& ctx, DomainSpec source,
                          DomainSpec target, std::vector<Expr> comps);
  static CBoundedMap from_json(const Context& ctx, const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// For each compact K_j of the source: the sampled (and, on the bounded
// fragment, symbolic) image must land in a compact subset of the target.
Verdict check_c_bounded(const Context& ctx, const DomainSpec& source,
                        const DomainSpec& target, std::span<const GF> comps);

// Opaque algebra morphism G(Omega_X) -> G(Omega_Y). Purity is a contract of
// the action; homomorphy and unitality are audited, never assumed.
struct AlgebraMorphism {
  std::function<GF(const GF&)> act;
  DomainSpec domain_x;  // algebra it consumes
  DomainSpec domain_y;  // algebra it produces
  bool unit_flag = false;
  std::string label;
};

// Pullback u |-> u o phi by symbolic substitution; structurally unital and
// multiplicative.
AlgebraMorphism pullback(const Context& ctx, const CBoundedMap& phi);

// Fixed, versioned probe corpus on Omega_X for morphism/functional audits.
std::vector<GF> probe_corpus(const Context& ctx, const DomainSpec& omega_x,
                             int count);

// Phi(1) = 1 plus additivity/multiplicativity over probe pairs.
Verdict audit_morphism(const Context& ctx, const AlgebraMorphism& Phi,
                       int pairs = 10);

struct RecoveredMap {
  CBoundedMap map;
  Verdict audit;
  Verdict c_bounded;  // Refuted here is an alarm, not a fallback
};
// Components are Phi(pr_i); uniqueness is componentwise gf_eq against any
// alternative recovery.
RecoveredMap recover_map(const Context& ctx, const AlgebraMorphism& Phi);

struct FactorizationRow {
  std::string label;
  Verdict verdict;
};
struct FactorizationReport {
  std::vector<FactorizationRow> rows;
  bool all_passed = true;  // no Refuted rows
};
FactorizationReport verify_factorization(const Context& ctx,
                                         const AlgebraMorphism& Phi,
                                         const CBoundedMap& phi,
                                         std::span<const GF> corpus);

// (phi o psi): Omega_Z -> Omega_X for phi: Y->X, psi: Z->Y.
CBoundedMap compose_maps(const Context& ctx, const CBoundedMap& phi,
                         const CBoundedMap& psi);

struct IsomorphismReport {
  Verdict verdict;
  int dim_x = 0, dim_y = 0;
  Verdict audit_fwd, audit_inv;
  std::vector<Verdict> identity_checks;  // componentwise, both directions
};
// Recovers both maps, verifies the two-sided identity composition and the
// dimension equality. A verified two-sided inverse with a dimension mismatch
// throws (contradiction with the correspondence).
IsomorphismReport verify_isomorphism(const Context& ctx,
                                     const AlgebraMorphism& Phi,
                                     const AlgebraMorphism& Phi_inv);

}  // namespace clab
