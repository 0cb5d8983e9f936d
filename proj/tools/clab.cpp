// colombeau-lab command line front end: classification, equality,
// S-inverses, point/map recovery, the torus pipeline, and a manifest runner.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "clab/report.hpp"

namespace {

using clab::Context;
using clab::Report;

struct GlobalOpts {
  Context ctx;
  std::uint64_t seed = 0;
  bool json = false;
  bool timing = false;
  std::vector<std::string> overridden;
};

void add_global_flags(CLI::App& app, GlobalOpts& g) {
  auto track = [&g](const std::string& name) {
    g.overridden.push_back(name);
  };
  app.add_option_function<double>(
         "--grid-ratio",
         [&g, track](double v) { g.ctx.grid.ratio = v; track("grid-ratio"); },
         "eps grid ratio q in (0,1)");
  app.add_option_function<int>(
      "--k-min", [&g, track](int v) { g.ctx.grid.k_min = v; track("k-min"); },
      "smallest grid exponent");
  app.add_option_function<int>(
      "--k-max", [&g, track](int v) { g.ctx.grid.k_max = v; track("k-max"); },
      "largest grid exponent");
  app.add_option_function<int>(
      "--m-max", [&g, track](int v) { g.ctx.asym.m_max = v; track("m-max"); },
      "negligibility test depth");
  app.add_option_function<int>(
      "--n-max", [&g, track](int v) { g.ctx.asym.n_max = v; track("n-max"); },
      "moderateness exponent cap");
  app.add_option_function<int>(
      "--lattice",
      [&g, track](int v) { g.ctx.lattice_intervals = v; track("lattice"); },
      "lattice intervals per axis");
  app.add_option_function<double>(
      "--tol-eq",
      [&g, track](double v) { g.ctx.asym.tol_eq = v; track("tol-eq"); },
      "relative floating-noise floor for equality");
  app.add_option("--seed", g.seed, "seed for randomized panels/corpora");
  app.add_flag("--json", g.json, "machine-readable JSON on stdout");
  app.add_flag("--timing", g.timing,
               "include wall time in JSON (breaks byte-reproducibility)");
}

void print_human(const Report& r) {
  std::cout << r.kind << ": " << (r.ok ? "ok" : "FAILED") << "  ("
            << r.wall_ms << " ms)\n";
  std::cout << r.result.dump(2) << "\n";
}

int emit(const GlobalOpts& g, const Report& r) {
  if (g.json) {
    nlohmann::json j = r.to_json(g.timing);
    j["params"] = context_params_json(g.ctx, g.seed, g.overridden);
    std::cout << j.dump() << "\n";
  } else {
    print_human(r);
  }
  return r.ok ? 0 : 1;
}

int run_one(const GlobalOpts& g, const std::string& kind,
            const nlohmann::json& inputs) {
  try {
    g.ctx.grid.validate();
    Report r = clab::run_scenario(g.ctx, kind, inputs, g.seed);
    r.params = context_params_json(g.ctx, g.seed, g.overridden);
    return emit(g, r);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_suite(const GlobalOpts& g, const std::string& manifest_path) {
  nlohmann::json manifest;
  {
    std::ifstream in(manifest_path);
    if (!in) {
      std::cerr << "error: cannot open manifest " << manifest_path << "\n";
      return 2;
    }
    in >> manifest;
  }
  nlohmann::json reports = nlohmann::json::array();
  int passed = 0, failed = 0, errored = 0;
  for (const auto& sc : manifest.at("scenarios")) {
    std::string kind = sc.at("kind").get<std::string>();
    Context ctx = g.ctx;  // per-scenario overrides on top of the globals
    if (sc.contains("overrides")) {
      const auto& ov = sc["overrides"];
      if (ov.contains("grid-ratio")) ctx.grid.ratio = ov["grid-ratio"];
      if (ov.contains("k-min")) ctx.grid.k_min = ov["k-min"];
      if (ov.contains("k-max")) ctx.grid.k_max = ov["k-max"];
      if (ov.contains("m-max")) ctx.asym.m_max = ov["m-max"];
      if (ov.contains("n-max")) ctx.asym.n_max = ov["n-max"];
      if (ov.contains("lattice")) ctx.lattice_intervals = ov["lattice"];
      if (ov.contains("tol-eq")) ctx.asym.tol_eq = ov["tol-eq"];
    }
    // One failing scenario must not abort the rest.
    try {
      ctx.grid.validate();
      Report r = clab::run_scenario(ctx, kind, sc.value("inputs",
                                                        nlohmann::json::object()),
                                    g.seed);
      r.params = context_params_json(ctx, g.seed, g.overridden);
      reports.push_back(r.to_json(g.timing));
      if (r.ok)
        ++passed;
      else
        ++failed;
      if (!g.json)
        std::cout << (r.ok ? "  pass  " : "  FAIL  ") << kind << "  ("
                  << r.wall_ms << " ms)\n";
    } catch (const std::exception& e) {
      nlohmann::json err;
      err["kind"] = kind;
      err["error"] = e.what();
      err["ok"] = false;
      reports.push_back(err);
      ++errored;
      if (!g.json) std::cout << "  ERROR " << kind << ": " << e.what() << "\n";
    }
  }
  nlohmann::json summary;
  summary["total"] = passed + failed + errored;
  summary["passed"] = passed;
  summary["failed"] = failed;
  summary["errored"] = errored;
  if (g.json) {
    nlohmann::json out;
    out["reports"] = reports;
    out["summary"] = summary;
    out["params"] = context_params_json(g.ctx, g.seed, g.overridden);
    std::cout << out.dump() << "\n";
  } else {
    std::cout << "suite: " << passed << " passed, " << failed << " failed, "
              << errored << " errored\n";
  }
  return (failed == 0 && errored == 0) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"colombeau-lab: executable nets, verdicts and recovery "
               "harnesses for generalized-function algebras"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  GlobalOpts g;
  add_global_flags(app, g);

  // kind -> (subcommand, input builder)
  nlohmann::json inputs;
  std::string pos_a, pos_b, pos_c;
  double psi_lo = -0.5, psi_hi = 0.5;

  auto* classify = app.add_subcommand("classify", "moderate/negligible verdicts "
                                                  "for an eps-only net");
  classify->add_option("expr", pos_a, "expression text or file")->required();

  auto* gneq = app.add_subcommand("gn-eq", "equality of generalized numbers");
  gneq->add_option("a", pos_a)->required();
  gneq->add_option("b", pos_b)->required();

  auto* wit = app.add_subcommand("witness-S", "witness subset from "
                                              "non-negligibility");
  wit->add_option("expr", pos_a)->required();

  std::string subset_kind = "whole";
  auto* sinv = app.add_subcommand("s-inverse", "constructive S-inverse");
  sinv->add_option("expr", pos_a)->required();
  sinv->add_option("--subset", subset_kind, "whole|witness");

  std::string domain_arg, point_arg, map_arg, inv_arg, diffeo_arg, net_arg,
      psi_arg;
  auto* gfc = app.add_subcommand("gf-classify", "classification on a domain");
  gfc->add_option("--domain", domain_arg)->required();
  gfc->add_option("expr", pos_a)->required();

  auto* gfe = app.add_subcommand("gf-eval", "point value u(x~)");
  gfe->add_option("--domain", domain_arg)->required();
  gfe->add_option("--point", point_arg)->required();
  gfe->add_option("expr", pos_a)->required();

  auto* gfi = app.add_subcommand("gf-invert", "S-inverse in G(Omega)");
  gfi->add_option("--domain", domain_arg)->required();
  gfi->add_option("expr", pos_a)->required();
  gfi->add_option("--subset", subset_kind, "whole|witness");

  auto* gfa = app.add_subcommand("gf-audit", "pointwise invertibility audit");
  gfa->add_option("--domain", domain_arg)->required();
  gfa->add_option("expr", pos_a)->required();
  gfa->add_option("--subset", subset_kind, "whole|witness");

  auto* pr = app.add_subcommand("point-recover", "functional -> point "
                                                 "round-trip");
  pr->add_option("--domain", domain_arg)->required();
  pr->add_option("--point", point_arg)->required();

  auto* mr = app.add_subcommand("map-recover", "morphism -> map round-trip");
  mr->add_option("map", map_arg)->required();

  auto* vi = app.add_subcommand("verify-iso", "two-sided isomorphism check");
  vi->add_option("map", map_arg)->required();
  vi->add_option("inverse", inv_arg)->required();

  auto* ie = app.add_subcommand("iso-extract", "diffeomorphism extraction "
                                               "from a pullback isomorphism");
  ie->add_option("diffeo", diffeo_arg)->required();

  auto* il = app.add_subcommand("iso-lift", "Colombeau lift of a smooth "
                                            "isomorphism");
  il->add_option("diffeo", diffeo_arg)->required();
  il->add_option("net", net_arg)->required();

  auto* as = app.add_subcommand("association", "pairing against a test "
                                               "function");
  as->add_option("--domain", domain_arg)->required();
  as->add_option("expr", pos_a)->required();
  as->add_option("--psi", psi_arg)->required();
  as->add_option("--psi-lo", psi_lo);
  as->add_option("--psi-hi", psi_hi);

  std::string manifest_arg;
  auto* rs = app.add_subcommand("run-suite", "run a scenario manifest");
  rs->add_option("manifest", manifest_arg)->required();

  CLI11_PARSE(app, argc, argv);

  if (classify->parsed()) return run_one(g, "classify", {{"expr", pos_a}});
  if (gneq->parsed()) return run_one(g, "gn-eq", {{"a", pos_a}, {"b", pos_b}});
  if (wit->parsed()) return run_one(g, "witness-S", {{"expr", pos_a}});
  if (sinv->parsed())
    return run_one(g, "s-inverse", {{"expr", pos_a}, {"subset", subset_kind}});
  if (gfc->parsed())
    return run_one(g, "gf-classify",
                   {{"domain", domain_arg}, {"expr", pos_a}});
  if (gfe->parsed())
    return run_one(g, "gf-eval", {{"domain", domain_arg},
                                  {"expr", pos_a},
                                  {"point", point_arg}});
  if (gfi->parsed())
    return run_one(g, "gf-invert", {{"domain", domain_arg},
                                    {"expr", pos_a},
                                    {"subset", subset_kind}});
  if (gfa->parsed())
    return run_one(g, "gf-audit", {{"domain", domain_arg},
                                   {"expr", pos_a},
                                   {"subset", subset_kind}});
  if (pr->parsed())
    return run_one(g, "point-recover",
                   {{"domain", domain_arg}, {"point", point_arg}});
  if (mr->parsed()) return run_one(g, "map-recover", {{"map", map_arg}});
  if (vi->parsed())
    return run_one(g, "verify-iso", {{"map", map_arg}, {"inverse", inv_arg}});
  if (ie->parsed()) return run_one(g, "iso-extract", {{"diffeo", diffeo_arg}});
  if (il->parsed())
    return run_one(g, "iso-lift", {{"diffeo", diffeo_arg}, {"net", net_arg}});
  if (as->parsed())
    return run_one(g, "association", {{"domain", domain_arg},
                                      {"expr", pos_a},
                                      {"psi", psi_arg},
                                      {"psi_lo", psi_lo},
                                      {"psi_hi", psi_hi}});
  if (rs->parsed()) return run_suite(g, manifest_arg);
  return 2;
}
