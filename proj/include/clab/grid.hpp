#pragma once

#include <stdexcept>
#include <vector>

#include "clab/scalar_ops.hpp"

namespace clab {

// Geometric eps grid eps_k = ratio^k, k_min <= k <= k_max, descending.
// The default (1/2, 4..40) spans 6.3e-2 down to 9.1e-13: wide enough to
// separate eps^12 from exp(-1/eps) numerically, clear of underflow.
struct EpsGrid {
  double ratio = 0.5;
  int k_min = 4;
  int k_max = 40;

  void validate() const {
    if (!(ratio > 0.0 && ratio < 1.0))
      throw std::invalid_argument("EpsGrid: ratio must be in (0,1)");
    if (!(k_max > k_min && k_min >= 0))
      throw std::invalid_argument("EpsGrid: need k_max > k_min >= 0");
    if (!(scalar_ops::pow_int(ratio, k_max) >= 1e-300))
      throw std::invalid_argument("EpsGrid: ratio^k_max underflows");
  }

  std::vector<double> samples() const {
    std::vector<double> s;
    s.reserve(static_cast<std::size_t>(k_max - k_min + 1));
    for (int k = k_min; k <= k_max; ++k)
      s.push_back(scalar_ops::pow_int(ratio, k));
    return s;
  }

  double largest() const { return scalar_ops::pow_int(ratio, k_min); }
  double floor() const { return scalar_ops::pow_int(ratio, k_max); }

  // Samples within one decade of the smallest one; the zone where the
  // asymptotic bounds are actually tested.
  std::vector<double> last_decade() const {
    std::vector<double> out;
    const double cut = 10.0 * floor();
    for (double e : samples())
      if (e <= cut) out.push_back(e);
    return out;
  }

  // Same grid continued to a deeper k_max (witness collection digs further
  // than the classification grid; still clear of underflow).
  EpsGrid deepened(int new_k_max) const {
    EpsGrid g = *this;
    g.k_max = std::max(k_max, new_k_max);
    while (scalar_ops::pow_int(g.ratio, g.k_max) < 1e-300) --g.k_max;
    return g;
  }
};

}  // namespace clab
