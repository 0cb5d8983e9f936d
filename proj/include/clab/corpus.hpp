#pragma once

#include "clab/functional.hpp"
#include "clab/torus.hpp"

namespace clab::corpus {

// Seeded random moderate eps-only representatives (powers, bounded
// oscillators, negligible perturbations).
std::vector<Expr> random_gn_reps(std::mt19937_64& rng, int count);

// Seeded random smooth-in-x representatives on a 1-d domain.
std::vector<Expr> random_gf_reps(std::mt19937_64& rng, int count);

// The fixed 40-net corpus for the S-invertibility round-trip (powers,
// exp(+-1/eps), oscillators, products); every member's negligibility is
// decidable on the default grid.
std::vector<Expr> proposition_nets();

struct GfFixture {
  std::string name;
  Expr rep;
  bool invertible;
};
// 10 invertible + 10 non-invertible functions on the standard domain; the
// non-invertible ones vanish on the sweep lattice.
std::vector<GfFixture> invertibility_fixtures();

DomainSpec standard_domain();  // (-2, 2)

// Seeded compactly supported points with constant/linear/negligible parts.
std::vector<GeneralizedPoint> random_points(const Context& ctx,
                                            const DomainSpec& dom,
                                            std::mt19937_64& rng, int count);

struct MapFixture {
  std::string name;
  CBoundedMap phi;
  std::optional<CBoundedMap> inverse;
};
// 30 c-bounded maps, the first 5 with exact two-sided inverses.
std::vector<MapFixture> map_fixtures(const Context& ctx,
                                     std::mt19937_64& rng);

// 10-diffeo corpus: lattice-aligned rotations, theta + b sin(theta) for
// b in {0.1, 0.3, 0.6}, perturbed variants, and the reflection.
std::vector<TorusDiffeo> diffeo_corpus(const Context& ctx,
                                       const TorusModel& m);

// Seeded cosine-polynomial corpus with nonnegative coefficients; |f| attains
// its sup at theta = 0, which diffeos fixing 0 (and lattice rotations) map to
// lattice nodes.
std::vector<TorusFun> norm_corpus(const TorusModel& m, std::mt19937_64& rng,
                                  int count, int max_harmonic = 4);

}  // namespace clab::corpus
