#pragma once

#include "clab/domain.hpp"

namespace clab {

// Compactly supported generalized point: n component nets in eps plus the
// declared compact support box.
struct GeneralizedPoint {
  std::vector<Expr> comps;
  Box support;

  int dim() const { return static_cast<int>(comps.size()); }

  static GeneralizedPoint constant(std::vector<double> x, Box support);
  static GeneralizedPoint from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Equivalence of points: the Euclidean distance net is negligible. The
// symbolic route runs on the squared distance (same negligibility), the grid
// route on the true distance.
Verdict point_equal(const Context& ctx, const GeneralizedPoint& x,
                    const GeneralizedPoint& y);

// Tail containment in the declared support box; Proven when the bounded
// fragment gives symbolic containment, consistent/Refuted from grid samples.
Verdict is_compactly_supported(const Context& ctx, const GeneralizedPoint& x);

// Smoothstep partition-of-unity interpolation through (eps_m, value_m) knots,
// descending eps_m. The returned expression equals value_m exactly at each
// knot (the weights are one-hot there), is constant near each knot, stays in
// the convex hull of the values, and is smooth on (0,1].
// Throws if consecutive knots are too close (eps_{m+1} > 0.9 eps_m).
Expr pou_interpolate(std::span<const double> knots,
                     std::span<const double> values);

// Keeps every sample with eps <= 0.9 * (previously kept eps).
std::vector<std::size_t> thin_eps_samples(std::span<const double> eps);

// The smooth witness-net construction: a point net passing exactly through
// the given samples, supported in their convex hull.
GeneralizedPoint interpolate_witness(
    std::span<const double> eps_knots,
    std::span<const std::vector<double>> points, int dim);

}  // namespace clab
