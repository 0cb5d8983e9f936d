#include "clab/report.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clab/corpus.hpp"

namespace clab {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Inline text or a path to a file holding it.
std::string text_or_file(const std::string& v) {
  if (std::filesystem::exists(v)) {
    std::string s = slurp(v);
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
  }
  return v;
}

nlohmann::json json_or_file(const nlohmann::json& v) {
  if (v.is_string()) {
    const std::string path = v.get<std::string>();
    if (!std::filesystem::exists(path))
      throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(slurp(path));
  }
  return v;  // inline object
}

Expr expr_input(const nlohmann::json& inputs, const char* key) {
  return parse(text_or_file(inputs.at(key).get<std::string>()));
}

DomainSpec domain_input(const nlohmann::json& inputs, const char* key) {
  return DomainSpec::from_json(json_or_file(inputs.at(key)));
}

GeneralizedPoint point_input(const nlohmann::json& inputs, const char* key) {
  return GeneralizedPoint::from_json(json_or_file(inputs.at(key)));
}

EpsSubset subset_input(const Context& ctx, const nlohmann::json& inputs,
                       const EpsNet& net) {
  std::string kind = inputs.value("subset", "whole");
  if (kind == "whole") return EpsSubset::whole_interval(ctx.grid);
  if (kind == "witness") {
    auto w = witness_S(ctx, net);
    if (!w.S)
      throw std::runtime_error(
          "no witness subset exists (net negligible or undetermined: " +
          std::string(status_name(w.negligibility.status)) + ")");
    return *w.S;
  }
  throw std::runtime_error("unknown subset kind '" + kind + "'");
}

nlohmann::json point_brief(const GeneralizedPoint& p) { return p.to_json(); }

TorusDiffeo diffeo_input(const Context& ctx, const nlohmann::json& inputs,
                         TorusModel& m_out) {
  nlohmann::json d = json_or_file(inputs.at("diffeo"));
  int n = d.value("lattice_n", 512);
  m_out = TorusModel::circle(n);
  int orientation = d.value("orientation", 1);
  Expr f = parse(d.value("periodic", "0"));
  return TorusDiffeo::make(ctx, m_out, orientation, f);
}

}  // namespace

nlohmann::json context_params_json(const Context& ctx, std::uint64_t seed,
                                   const std::vector<std::string>& overridden) {
  nlohmann::json p;
  p["grid"] = {{"ratio", ctx.grid.ratio},
               {"k_min", ctx.grid.k_min},
               {"k_max", ctx.grid.k_max}};
  p["m_max"] = ctx.asym.m_max;
  p["n_max"] = ctx.asym.n_max;
  p["tol_eq"] = ctx.asym.tol_eq;
  p["lattice_intervals"] = ctx.lattice_intervals;
  p["derivative_cap"] = ctx.derivative_cap;
  p["seed"] = seed;
  p["overridden"] = overridden;
  return p;
}

Report run_scenario(const Context& ctx, const std::string& kind,
                    const nlohmann::json& inputs, std::uint64_t seed) {
  Report rep;
  rep.kind = kind;
  rep.inputs = inputs;
  auto t0 = std::chrono::steady_clock::now();

  if (kind == "classify") {
    Expr e = expr_input(inputs, "expr");
    EpsNet net = EpsNet::from_expr(simplify(e));
    rep.result["moderate"] = check_moderate(net, ctx.grid, ctx.asym).to_json();
    rep.result["negligible"] =
        check_negligible(net, ctx.grid, ctx.asym).to_json();
  } else if (kind == "gn-eq") {
    GN a = GN::make(ctx, expr_input(inputs, "a"));
    GN b = GN::make(ctx, expr_input(inputs, "b"));
    Verdict v = gn_eq(ctx, a, b);
    rep.result["equal"] = v.to_json();
  } else if (kind == "witness-S") {
    EpsNet net = EpsNet::from_expr(simplify(expr_input(inputs, "expr")));
    auto w = witness_S(ctx, net);
    rep.result["negligible"] = w.negligibility.to_json();
    if (w.S) {
      auto samples = w.S->collect(ctx.witness_grid().floor());
      rep.result["S"] = {{"exponent", *w.exponent}, {"samples", samples}};
    } else {
      rep.result["S"] = nullptr;
    }
  } else if (kind == "s-inverse") {
    GN r = GN::make(ctx, expr_input(inputs, "expr"));
    EpsSubset S = subset_input(ctx, inputs, r.net());
    auto si = s_inverse(ctx, r, S);
    rep.result["m"] = si.m;
    rep.result["subset"] = S.label;
    rep.result["contract"] = si.contract.to_json();
    rep.result["s_rep"] = print(si.s.rep());
    rep.result["rprime_rep"] = print(si.rprime.rep());
    rep.ok = si.contract.not_refuted();
  } else if (kind == "gf-classify") {
    DomainSpec dom = domain_input(inputs, "domain");
    GF u = GF::make(ctx, dom, expr_input(inputs, "expr"));
    rep.result["moderate"] = check_moderate_gf(ctx, u).to_json();
    rep.result["negligible"] = check_negligible_gf(ctx, u).to_json();
    int jm = dom.exhaustion().back().first;
    MultiIndex zero(static_cast<std::size_t>(dom.dim), 0);
    rep.result["refinement_discrepancy"] =
        sweep_discrepancy(ctx, u, jm, zero, ctx.grid.largest());
  } else if (kind == "gf-eval") {
    DomainSpec dom = domain_input(inputs, "domain");
    GF u = GF::make(ctx, dom, expr_input(inputs, "expr"));
    GeneralizedPoint p = point_input(inputs, "point");
    GN v = eval_at(ctx, u, p);
    rep.result["value_rep"] = print(v.rep());
    rep.result["moderate"] = v.moderate(ctx).to_json();
    rep.result["negligible"] = v.negligible(ctx).to_json();
  } else if (kind == "gf-invert") {
    DomainSpec dom = domain_input(inputs, "domain");
    GF u = GF::make(ctx, dom, expr_input(inputs, "expr"));
    auto exh = dom.exhaustion();
    EpsSubset S = subset_input(ctx, inputs,
                               inf_net(ctx, u, exh.back().first));
    auto si = gf_s_inverse(ctx, u, S);
    rep.result["m"] = si.m;
    rep.result["contract"] = si.contract.to_json();
    rep.result["rprime_rep"] = print(si.rprime.rep());
    rep.ok = si.contract.not_refuted();
  } else if (kind == "gf-audit") {
    DomainSpec dom = domain_input(inputs, "domain");
    GF u = GF::make(ctx, dom, expr_input(inputs, "expr"));
    auto exh = dom.exhaustion();
    EpsSubset S = subset_input(ctx, inputs,
                               inf_net(ctx, u, exh.back().first));
    std::mt19937_64 rng(seed);
    auto audit = pointwise_invertibility_audit(ctx, u, S, rng);
    rep.result["verdict"] = audit.verdict.to_json();
    nlohmann::json panel = nlohmann::json::array();
    for (const auto& p : audit.panel) panel.push_back(p.to_json());
    rep.result["panel"] = panel;
    if (audit.witness) rep.result["witness"] = point_brief(*audit.witness);
    if (audit.witness_value_negligible)
      rep.result["witness_value_negligible"] =
          audit.witness_value_negligible->to_json();
    rep.ok = audit.verdict.rule != "reverse-witness-alarm" &&
             !(audit.verdict.rule == "forward-panel" &&
               audit.verdict.refuted());
  } else if (kind == "point-recover") {
    DomainSpec dom = domain_input(inputs, "domain");
    GeneralizedPoint p = point_input(inputs, "point");
    Functional nu = evaluation_functional(ctx, p, dom);
    auto rec = recover_point(ctx, nu);
    Verdict eq = point_equal(ctx, p, rec.point);
    rep.result["audit"] = rec.audit.to_json();
    rep.result["verification"] = rec.verification.to_json();
    rep.result["point_equal"] = eq.to_json();
    rep.result["recovered"] = point_brief(rec.point);
    rep.ok = rec.audit.not_refuted() && rec.verification.not_refuted() &&
             eq.not_refuted();
  } else if (kind == "map-recover") {
    CBoundedMap phi = CBoundedMap::from_json(ctx, json_or_file(inputs.at("map")));
    AlgebraMorphism Phi = pullback(ctx, phi);
    auto rec = recover_map(ctx, Phi);
    nlohmann::json comps = nlohmann::json::array();
    bool all_ok = rec.audit.not_refuted() && rec.c_bounded.not_refuted();
    for (std::size_t i = 0; i < phi.comps.size(); ++i) {
      Verdict v = gf_eq(ctx, rec.map.comps[i], phi.comps[i]);
      all_ok = all_ok && !v.refuted();
      comps.push_back(v.to_json());
    }
    auto corpus_fns = probe_corpus(ctx, phi.target, 10);
    auto fact = verify_factorization(ctx, Phi, phi, corpus_fns);
    rep.result["audit"] = rec.audit.to_json();
    rep.result["c_bounded"] = rec.c_bounded.to_json();
    rep.result["component_roundtrip"] = comps;
    rep.result["factorization_all_passed"] = fact.all_passed;
    rep.ok = all_ok && fact.all_passed;
  } else if (kind == "verify-iso") {
    CBoundedMap phi = CBoundedMap::from_json(ctx, json_or_file(inputs.at("map")));
    CBoundedMap inv =
        CBoundedMap::from_json(ctx, json_or_file(inputs.at("inverse")));
    auto report = verify_isomorphism(ctx, pullback(ctx, phi),
                                     pullback(ctx, inv));
    rep.result["verdict"] = report.verdict.to_json();
    rep.result["dim_x"] = report.dim_x;
    rep.result["dim_y"] = report.dim_y;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.identity_checks) checks.push_back(c.to_json());
    rep.result["identity_checks"] = checks;
    rep.ok = report.verdict.not_refuted();
  } else if (kind == "iso-extract") {
    TorusModel m;
    TorusDiffeo hidden = diffeo_input(ctx, inputs, m);
    SmoothIso Psi = pullback_iso(ctx, hidden);
    std::mt19937_64 rng(seed);
    auto corpus = corpus::norm_corpus(m, rng, 5);
    auto ex = extract_diffeo(ctx, Psi, corpus);
    double worst = 0;
    for (double t : m.axis_nodes())
      worst = std::max(worst, std::fabs(ex.psi.apply(t) - hidden.apply(t)));
    rep.result["verdict"] = ex.verdict.to_json();
    rep.result["orientation"] = ex.psi.orientation();
    rep.result["max_angle_error"] = worst;
    rep.result["projection_defect"] = ex.max_projection_defect;
    rep.result["uniqueness_error"] = ex.uniqueness_error;
    rep.result["lattice_n"] = m.lattice_n;
    rep.ok = ex.verdict.proven() && worst <= 1e-8;
  } else if (kind == "iso-lift") {
    TorusModel m;
    TorusDiffeo psi = diffeo_input(ctx, inputs, m);
    SmoothIso Psi = pullback_iso(ctx, psi);
    auto lift = lift_isomorphism(ctx, Psi, psi);
    Expr net = expr_input(inputs, "net");
    Expr lifted = lift.act(net);
    auto before = classify_torus_net(ctx, m, net);
    auto after = classify_torus_net(ctx, m, lifted);
    bool preserved =
        before.moderate.status == after.moderate.status &&
        before.negligible.acceptable() == after.negligible.acceptable();
    rep.result["well_defined"] = lift.well_defined.to_json();
    rep.result["before"] = {{"moderate", before.moderate.to_json()},
                            {"negligible", before.negligible.to_json()}};
    rep.result["after"] = {{"moderate", after.moderate.to_json()},
                           {"negligible", after.negligible.to_json()}};
    rep.result["preserved"] = preserved;
    rep.ok = preserved;
  } else if (kind == "association") {
    DomainSpec dom = domain_input(inputs, "domain");
    GF u = GF::make(ctx, dom, expr_input(inputs, "expr"));
    Expr psi = expr_input(inputs, "psi");
    double lo = inputs.at("psi_lo").get<double>();
    double hi = inputs.at("psi_hi").get<double>();
    auto samples = association_pairing(ctx, u, psi, lo, hi);
    nlohmann::json arr = nlohmann::json::array();
    std::optional<PairingSample> last;
    for (const auto& s : samples) {
      arr.push_back({{"eps", s.eps},
                     {"value", s.value},
                     {"converged", s.converged}});
      if (s.converged) last = s;
    }
    rep.result["pairings"] = arr;
    if (last)
      rep.result["last_converged"] = {{"eps", last->eps},
                                      {"value", last->value}};
    rep.ok = last.has_value();
  } else {
    throw std::runtime_error("unknown scenario kind '" + kind + "'");
  }

  auto t1 = std::chrono::steady_clock::now();
  rep.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return rep;
}

}  // namespace clab
