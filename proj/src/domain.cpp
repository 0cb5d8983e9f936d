#include "clab/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace clab {

DomainSpec DomainSpec::box(std::vector<double> lo, std::vector<double> hi,
                           int j_max) {
  if (lo.empty() || lo.size() != hi.size())
    throw std::invalid_argument("DomainSpec: bad box bounds");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw std::invalid_argument("DomainSpec: empty box");
  DomainSpec d;
  d.dim = static_cast<int>(lo.size());
  d.shape = Shape::Box;
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  d.j_max = j_max;
  return d;
}

DomainSpec DomainSpec::ball(std::vector<double> center, double radius,
                            int j_max) {
  if (center.empty() || !(radius > 0))
    throw std::invalid_argument("DomainSpec: bad ball");
  DomainSpec d;
  d.dim = static_cast<int>(center.size());
  d.shape = Shape::Ball;
  d.center = std::move(center);
  d.radius = radius;
  d.j_max = j_max;
  return d;
}

DomainSpec DomainSpec::from_json(const nlohmann::json& j) {
  int dim = j.at("dim").get<int>();
  int j_max = j.value("j_max", 4);
  std::string shape = j.value("shape", "box");
  if (shape == "box") {
    std::vector<double> lo, hi;
    for (const auto& b : j.at("bounds")) {
      lo.push_back(b.at(0).get<double>());
      hi.push_back(b.at(1).get<double>());
    }
    if (static_cast<int>(lo.size()) != dim)
      throw std::invalid_argument("domain json: bounds/dim mismatch");
    return box(std::move(lo), std::move(hi), j_max);
  }
  if (shape == "ball") {
    auto d = ball(j.at("center").get<std::vector<double>>(),
                  j.at("radius").get<double>(), j_max);
    if (d.dim != dim) throw std::invalid_argument("domain json: center/dim");
    return d;
  }
  throw std::invalid_argument("domain json: unknown shape '" + shape + "'");
}

nlohmann::json DomainSpec::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["j_max"] = j_max;
  if (shape == Shape::Box) {
    j["shape"] = "box";
    auto bounds = nlohmann::json::array();
    for (int i = 0; i < dim; ++i)
      bounds.push_back({lo[static_cast<std::size_t>(i)],
                        hi[static_cast<std::size_t>(i)]});
    j["bounds"] = bounds;
  } else {
    j["shape"] = "ball";
    j["center"] = center;
    j["radius"] = radius;
  }
  return j;
}

bool DomainSpec::same_as(const DomainSpec& o) const {
  return to_json() == o.to_json();
}

Box DomainSpec::bounding() const {
  if (shape == Shape::Box) return {lo, hi};
  Box b;
  for (double c : center) {
    b.lo.push_back(c - radius);
    b.hi.push_back(c + radius);
  }
  return b;
}

bool DomainSpec::contains(std::span<const double> x) const {
  if (shape == Shape::Box) {
    for (int i = 0; i < dim; ++i) {
      std::size_t u = static_cast<std::size_t>(i);
      if (!(x[u] > lo[u] && x[u] < hi[u])) return false;
    }
    return true;
  }
  double d2 = 0;
  for (int i = 0; i < dim; ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    double dx = x[u] - center[u];
    d2 += dx * dx;
  }
  return d2 < radius * radius;
}

bool DomainSpec::strictly_contains(const Box& b, double gap) const {
  if (shape == Shape::Box) return b.inside(Box{lo, hi}, gap);
  // Ball: farthest corner of the box from the center must stay inside.
  double d2 = 0;
  for (int i = 0; i < dim; ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    double far = std::max(std::fabs(b.lo[u] - center[u]),
                          std::fabs(b.hi[u] - center[u]));
    d2 += far * far;
  }
  return std::sqrt(d2) <= radius - gap;
}

std::optional<Box> DomainSpec::compact(int j) const {
  if (j < 1) return std::nullopt;
  const double margin = 1.0 / j;
  Box k;
  if (shape == Shape::Box) {
    for (int i = 0; i < dim; ++i) {
      std::size_t u = static_cast<std::size_t>(i);
      double a = lo[u] + margin, b = hi[u] - margin;
      if (a > b) return std::nullopt;
      k.lo.push_back(a);
      k.hi.push_back(b);
    }
    return k;
  }
  double r = radius - margin;
  if (!(r >= 0)) return std::nullopt;
  for (int i = 0; i < dim; ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    k.lo.push_back(center[u] - r);
    k.hi.push_back(center[u] + r);
  }
  return k;
}

std::vector<std::pair<int, Box>> DomainSpec::exhaustion() const {
  std::vector<std::pair<int, Box>> out;
  for (int j = 1; j <= j_max; ++j)
    if (auto k = compact(j)) out.emplace_back(j, *k);
  if (out.empty())
    throw std::invalid_argument(
        "DomainSpec: exhaustion is empty up to j_max; domain too small");
  return out;
}

Lattice make_lattice(const Box& k, int intervals,
                     const DomainSpec* ball_filter) {
  const int dim = k.dim();
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) {
    std::size_t u = static_cast<std::size_t>(d);
    double width = k.hi[u] - k.lo[u];
    if (width == 0.0) {
      axes[u] = {k.lo[u]};
      continue;
    }
    double step = width / intervals;
    axes[u].reserve(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) axes[u].push_back(k.lo[u] + i * step);
    axes[u].back() = k.hi[u];  // pin the endpoint exactly
  }
  Lattice lat;
  lat.coords.assign(static_cast<std::size_t>(dim), {});
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> pt(static_cast<std::size_t>(dim));
  while (true) {
    for (int d = 0; d < dim; ++d)
      pt[static_cast<std::size_t>(d)] =
          axes[static_cast<std::size_t>(d)][idx[static_cast<std::size_t>(d)]];
    bool keep = true;
    if (ball_filter && ball_filter->shape == DomainSpec::Shape::Ball) {
      double d2 = 0;
      for (int d = 0; d < dim; ++d) {
        std::size_t u = static_cast<std::size_t>(d);
        double dx = pt[u] - ball_filter->center[u];
        d2 += dx * dx;
      }
      keep = d2 <= ball_filter->radius * ball_filter->radius;
    }
    if (keep) {
      for (int d = 0; d < dim; ++d)
        lat.coords[static_cast<std::size_t>(d)].push_back(
            pt[static_cast<std::size_t>(d)]);
    }
    int d = 0;
    for (; d < dim; ++d) {
      std::size_t u = static_cast<std::size_t>(d);
      if (++idx[u] < axes[u].size()) break;
      idx[u] = 0;
    }
    if (d == dim) break;
  }
  lat.size = lat.coords.empty() ? 0 : lat.coords[0].size();
  return lat;
}

int lattice_intervals_for(const Context& ctx, int dim) {
  if (dim >= 3) return std::max(4, ctx.lattice_intervals / 4);
  return ctx.lattice_intervals;
}

}  // namespace clab
