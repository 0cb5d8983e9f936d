#include "clab/gen_point.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

GeneralizedPoint GeneralizedPoint::constant(std::vector<double> x,
                                            Box support) {
  GeneralizedPoint p;
  for (double v : x) p.comps.push_back(const_from_double(v));
  p.support = std::move(support);
  return p;
}

GeneralizedPoint GeneralizedPoint::from_json(const nlohmann::json& j) {
  GeneralizedPoint p;
  for (const auto& s : j.at("comps"))
    p.comps.push_back(parse(s.get<std::string>()));
  p.support.lo = j.at("support").at("lo").get<std::vector<double>>();
  p.support.hi = j.at("support").at("hi").get<std::vector<double>>();
  if (p.support.lo.size() != p.comps.size())
    throw std::invalid_argument("point json: support/comps dim mismatch");
  return p;
}

nlohmann::json GeneralizedPoint::to_json() const {
  nlohmann::json j;
  j["comps"] = nlohmann::json::array();
  for (const auto& c : comps) j["comps"].push_back(print(c));
  j["support"] = {{"lo", support.lo}, {"hi", support.hi}};
  return j;
}

// ---------------------------------------------------------------------------

Verdict point_equal(const Context& ctx, const GeneralizedPoint& x,
                    const GeneralizedPoint& y) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("point_equal: dimension mismatch");
  Expr d2 = c_int(0);
  for (int i = 0; i < x.dim(); ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    d2 = d2 + Expr::pow(x.comps[u] - y.comps[u], Rational(2));
  }
  d2 = simplify(d2);
  if (d2.is_const(Rational(0)))
    return Verdict::make_proven("symbolic-zero", "identical component nets");

  Valuation val = symbolic_valuation(d2, ctx.grid.largest());
  if (val.lo == kInf)
    return Verdict::make_proven(
        "symbolic", "squared distance has valuation +inf (negligible)");

  EpsNet d2net = EpsNet::from_expr(d2, "dist^2");
  EpsNet dist = EpsNet::from_fn(
      [d2net](double e) { return std::sqrt(std::max(0.0, d2net.fn(e))); },
      "dist");
  if (val.hi < kInf) {
    Verdict v = Verdict::make_refuted(
        "symbolic", "squared distance valuation hi < +inf: points differ");
    for (double e : ctx.grid.last_decade())
      v.witnesses.push_back({e, dist.fn(e)});
    if (v.witnesses.size() > 2) v.witnesses.resize(2);
    return v;
  }
  // Rounding noise of the coordinate nets is not a genuine distance.
  auto eps = ctx.grid.samples();
  bool under_floor = true;
  for (double e : eps) {
    double scale = 0;
    VarBinding b{e, {}};
    for (int i = 0; i < x.dim(); ++i) {
      std::size_t u = static_cast<std::size_t>(i);
      scale += std::fabs(evaluate(x.comps[u], b)) +
               std::fabs(evaluate(y.comps[u], b));
    }
    if (dist.fn(e) > ctx.asym.tol_eq * scale) {
      under_floor = false;
      break;
    }
  }
  if (under_floor)
    return Verdict::make_proven(
        "grid-identity",
        "distance within the floating-noise floor of the coordinate scales");
  return check_negligible(dist, ctx.grid, ctx.asym);
}

Verdict is_compactly_supported(const Context& ctx,
                               const GeneralizedPoint& x) {
  const Box& k = x.support;
  if (k.dim() != x.dim())
    throw std::invalid_argument("is_compactly_supported: bad support box");

  bool symbolic = true;
  for (int i = 0; i < x.dim() && symbolic; ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    Ival r = eval_interval(x.comps[u], eps_germ(ctx.grid.largest()), {});
    symbolic = r.bounded() && r.lo >= k.lo[u] - 1e-12 && r.hi <= k.hi[u] + 1e-12;
  }
  if (symbolic)
    return Verdict::make_proven(
        "symbolic", "bounded-fragment ranges contained in the support box");

  auto eps = ctx.grid.samples();
  std::vector<std::vector<double>> vals;
  for (const auto& c : x.comps)
    vals.push_back(EpsNet::from_expr(c).values(eps));

  auto in_box = [&](std::size_t idx) {
    for (int i = 0; i < x.dim(); ++i) {
      std::size_t u = static_cast<std::size_t>(i);
      double v = vals[u][idx];
      if (!std::isfinite(v) || v < k.lo[u] - 1e-12 || v > k.hi[u] + 1e-12)
        return false;
    }
    return true;
  };

  // Smallest index from which the whole sampled tail stays in K; that sample
  // is the recorded eps0.
  std::size_t first_ok = eps.size();
  for (std::size_t i = eps.size(); i-- > 0;) {
    if (!in_box(i)) break;
    first_ok = i;
  }
  if (first_ok < eps.size()) {
    return Verdict::make_undetermined(
        "grid-consistent", true,
        "sampled tail contained in the support box below eps0=" +
            std::to_string(eps[first_ok]));
  }
  Verdict v = Verdict::make_refuted(
      "grid-witness", "tail samples escape the declared support box");
  for (std::size_t i = eps.size(); i-- > 0;) {
    if (!in_box(i)) {
      v.witnesses.push_back({eps[i], vals[0][i]});
      break;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Partition-of-unity interpolation

std::vector<std::size_t> thin_eps_samples(std::span<const double> eps) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (keep.empty() || eps[i] <= 0.9 * eps[keep.back()]) keep.push_back(i);
  }
  return keep;
}

Expr pou_interpolate(std::span<const double> knots,
                     std::span<const double> values) {
  if (knots.empty() || knots.size() != values.size())
    throw std::invalid_argument("pou_interpolate: bad knot/value lists");
  const std::size_t n = knots.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(knots[i] > 0.0))
      throw std::invalid_argument("pou_interpolate: knots must be positive");
    if (i > 0 && knots[i] > 0.9 * knots[i - 1])
      throw std::invalid_argument(
          "pou_interpolate: overlapping eps-intervals (samples too close; "
          "re-thin with thin_eps_samples)");
  }
  if (n == 1) return const_from_double(values[0]);

  // Gap blends g_i between knot i and knot i+1, flat (exactly 0/1) on a
  // quarter-plateau around each knot in log-eps.
  Expr log_eps = Expr::unary(Op::Log, Expr::eps());
  std::vector<Expr> g;
  g.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double li = std::log(knots[i]);
    double li1 = std::log(knots[i + 1]);
    Expr tau = (log_eps - const_from_double(li1)) *
               const_from_double(1.0 / (li - li1));
    g.push_back(smoothstep((tau - c_rat(1, 4)) * c_int(2)));
  }

  // One-hot weights at knots: phi_m = (1 - g_{m-1}) * g_m with g_{-1} = 0 and
  // g_{n-1} = 1; the sum collapses to the knot value exactly.
  Expr acc = c_int(0);
  for (std::size_t m = 0; m < n; ++m) {
    Expr phi = m + 1 < n ? g[m] : c_int(1);
    if (m > 0) phi = (c_int(1) - g[m - 1]) * phi;
    acc = acc + phi * const_from_double(values[m]);
  }
  return acc;
}

GeneralizedPoint interpolate_witness(
    std::span<const double> eps_knots,
    std::span<const std::vector<double>> points, int dim) {
  if (eps_knots.size() != points.size() || eps_knots.empty())
    throw std::invalid_argument("interpolate_witness: bad samples");
  GeneralizedPoint p;
  Box hull;
  hull.lo.assign(static_cast<std::size_t>(dim), kInf);
  hull.hi.assign(static_cast<std::size_t>(dim), -kInf);
  for (const auto& pt : points) {
    if (static_cast<int>(pt.size()) != dim)
      throw std::invalid_argument("interpolate_witness: dim mismatch");
    for (int d = 0; d < dim; ++d) {
      std::size_t u = static_cast<std::size_t>(d);
      hull.lo[u] = std::min(hull.lo[u], pt[u]);
      hull.hi[u] = std::max(hull.hi[u], pt[u]);
    }
  }
  for (int d = 0; d < dim; ++d) {
    std::size_t u = static_cast<std::size_t>(d);
    std::vector<double> vals;
    vals.reserve(points.size());
    for (const auto& pt : points) vals.push_back(pt[u]);
    p.comps.push_back(pou_interpolate(eps_knots, vals));
  }
  p.support = std::move(hull);
  return p;
}

}  // namespace clab
