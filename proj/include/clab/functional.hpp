#pragma once

#include "clab/morphism.hpp"

namespace clab {

// Opaque evaluation functional G(Omega) -> K~. Linearity and multiplicativity
// are audited on a fixed probe corpus, never assumed; the action must be pure.
struct Functional {
  std::function<GN(const GF&)> act;
  DomainSpec domain;
  std::string label;
};

Functional evaluation_functional(const Context& ctx,
                                 const GeneralizedPoint& x,
                                 DomainSpec domain);

// nu(1) = 1 plus additivity/multiplicativity over probe pairs; Refuted cites
// the failing probe.
Verdict audit_functional(const Context& ctx, const Functional& nu,
                         int pairs = 10);

struct RecoveredPoint {
  GeneralizedPoint point;
  Verdict audit;
  Verdict verification;  // nu(u) == u(x~) over the verification corpus
};

// Components are nu(pr_i); throws if the audit refutes. The returned point
// satisfies nu(u) = u(x~) (not Refuted) over the verification corpus.
RecoveredPoint recover_point(const Context& ctx, const Functional& nu);

}  // namespace clab
