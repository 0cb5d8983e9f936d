#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "clab/gen_number.hpp"

namespace clab {

struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x, double margin = 0.0) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(x[i] >= lo[i] - margin && x[i] <= hi[i] + margin)) return false;
    return true;
  }
  bool inside(const Box& outer, double gap = 0.0) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] >= outer.lo[i] + gap && hi[i] <= outer.hi[i] - gap))
        return false;
    return true;
  }
};

// Open coordinate domain with its compact exhaustion K_j (closed boxes/balls
// shrunk by margin 1/j). K_j are nested increasing; degenerate K_j (margin
// swallows the domain) are skipped.
struct DomainSpec {
  enum class Shape { Box, Ball };
  int dim = 1;
  Shape shape = Shape::Box;
  std::vector<double> lo, hi;      // Box: open bounds
  std::vector<double> center;      // Ball
  double radius = 0.0;
  int j_max = 4;

  static DomainSpec box(std::vector<double> lo, std::vector<double> hi,
                        int j_max = 4);
  static DomainSpec ball(std::vector<double> center, double radius,
                         int j_max = 4);
  static DomainSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  bool same_as(const DomainSpec& o) const;

  // Enclosing open box (the ball's bounding box).
  Box bounding() const;
  bool contains(std::span<const double> x) const;
  // Strictly-inside test with a positive gap to the boundary.
  bool strictly_contains(const Box& b, double gap = 1e-9) const;

  // Compact member K_j, or nullopt when empty.
  std::optional<Box> compact(int j) const;
  // All non-empty (j, K_j), j = 1..j_max.
  std::vector<std::pair<int, Box>> exhaustion() const;
};

// Deterministic evaluation lattice on a compact box: `intervals` subdivisions
// per axis (nodes include endpoints and, for symmetric boxes, the center).
// For Ball domains the box lattice is filtered by membership.
struct Lattice {
  // coords[v][i] is coordinate v+1 of node i.
  std::vector<std::vector<double>> coords;
  std::size_t size = 0;
};

Lattice make_lattice(const Box& k, int intervals,
                     const DomainSpec* ball_filter = nullptr);

// Lattice resolution rule: 64 intervals per axis for dim <= 2, 16 for dim 3.
int lattice_intervals_for(const Context& ctx, int dim);

}  // namespace clab
