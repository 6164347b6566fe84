// Command-line front end: parse a JSON config, run one of the analysis
// pipelines, and emit a JSON report plus CSV curve files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crossbif/builtins.hpp"
#include "crossbif/classifier.hpp"
#include "crossbif/continuation.hpp"
#include "crossbif/io.hpp"
#include "crossbif/parallel.hpp"
#include "crossbif/perturbation.hpp"
#include "crossbif/poincare.hpp"

namespace fs = std::filesystem;
using crossbif::errc;
using crossbif::fail;
using crossbif::ordered_json;

namespace {

constexpr const char* kSchemaTag = "crossbif-report-v1";
constexpr const char* kVersion = "0.1.0";

struct CliOptions {
  std::string config_path;
  std::string out_dir{"."};
  std::optional<double> seed_eps;
  std::vector<std::string> tol_overrides;
};

// ---------------------------------------------------------------------------
// strict config access: unknown keys, wrong types, and missing required
// values are config errors (exit 2), never silent defaults

void require_keys(const ordered_json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(errc::config_invalid, std::string(where) + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      fail(errc::config_invalid, "unknown key '" + it.key() + "' in " + where);
  }
}

double num_at(const ordered_json& obj, const char* key, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(errc::config_invalid, std::string("missing required number '") + key + "'");
  }
  if (!obj[key].is_number())
    fail(errc::config_invalid, std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

int int_at(const ordered_json& obj, const char* key, std::optional<int> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(errc::config_invalid, std::string("missing required integer '") + key + "'");
  }
  if (!obj[key].is_number_integer())
    fail(errc::config_invalid, std::string("'") + key + "' must be an integer");
  return obj[key].get<int>();
}

std::string str_at(const ordered_json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_string())
    fail(errc::config_invalid, std::string("missing required string '") + key + "'");
  return obj[key].get<std::string>();
}

bool bool_at(const ordered_json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    fail(errc::config_invalid, std::string("'") + key + "' must be a boolean");
  return obj[key].get<bool>();
}

const ordered_json& obj_at(const ordered_json& obj, const char* key) {
  if (!obj.contains(key))
    fail(errc::config_invalid, std::string("missing required object '") + key + "'");
  return obj[key];
}

std::pair<double, double> range_at(const ordered_json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_array() || obj[key].size() != 2 ||
      !obj[key][0].is_number() || !obj[key][1].is_number())
    fail(errc::config_invalid, std::string("'") + key + "' must be [lo, hi]");
  return {obj[key][0].get<double>(), obj[key][1].get<double>()};
}

// ---------------------------------------------------------------------------
// domain object parsing

std::shared_ptr<const crossbif::MapFamily> parse_family(const ordered_json& j) {
  require_keys(j, "family", {"kind", "g", "theta", "delta_shift_q", "delta_shift_p"});
  crossbif::BuiltinFamilySpec spec;
  const std::string kind = str_at(j, "kind");
  if (kind == "shear")
    spec.kind = crossbif::BuiltinFamilySpec::Kind::shear_composition;
  else if (kind == "rotated")
    spec.kind = crossbif::BuiltinFamilySpec::Kind::rotated_conjugate;
  else if (kind == "two-param")
    spec.kind = crossbif::BuiltinFamilySpec::Kind::two_param_extension;
  else
    fail(errc::config_invalid, "family kind must be shear, rotated, or two-param");

  if (!j.contains("g") || !j["g"].is_array())
    fail(errc::config_invalid, "family needs a 'g' monomial array");
  for (const auto& t : j["g"]) {
    require_keys(t, "family.g term", {"i", "j", "k", "c"});
    crossbif::GTerm term;
    term.i = int_at(t, "i", 0);
    term.j = int_at(t, "j", 0);
    term.k = int_at(t, "k", 0);
    term.c = num_at(t, "c");
    spec.g.push_back(term);
  }
  spec.theta = num_at(j, "theta", 0.0);
  spec.delta_shift_q = num_at(j, "delta_shift_q", 0.0);
  spec.delta_shift_p = num_at(j, "delta_shift_p", 0.0);
  return crossbif::make_family(spec);
}

crossbif::HamiltonianSystem parse_potential(const ordered_json& j) {
  require_keys(j, "potential", {"name", "terms"});
  if (j.contains("name") == j.contains("terms"))
    fail(errc::config_invalid, "potential needs exactly one of 'name' or 'terms'");
  if (j.contains("name")) return crossbif::HamiltonianSystem::named(str_at(j, "name"));
  std::vector<crossbif::PotentialTerm> terms;
  if (!j["terms"].is_array()) fail(errc::config_invalid, "potential 'terms' must be an array");
  for (const auto& t : j["terms"]) {
    require_keys(t, "potential term", {"i", "j", "c"});
    terms.push_back({int_at(t, "i", 0), int_at(t, "j", 0), num_at(t, "c")});
  }
  return crossbif::HamiltonianSystem::from_terms(terms);
}

crossbif::Poly parse_perturbation(const ordered_json& j) {
  require_keys(j, "perturbation term", {"name", "terms"});
  if (j.contains("name") == j.contains("terms"))
    fail(errc::config_invalid, "perturbation needs exactly one of 'name' or 'terms'");
  if (j.contains("name")) return crossbif::perturbation_named(str_at(j, "name"));
  crossbif::Poly f;
  if (!j["terms"].is_array())
    fail(errc::config_invalid, "perturbation 'terms' must be an array");
  for (const auto& t : j["terms"]) {
    require_keys(t, "perturbation term", {"i", "j", "k", "l", "c"});
    f += crossbif::Poly::monomial(
        {int_at(t, "i", 0), int_at(t, "j", 0), int_at(t, "k", 0), int_at(t, "l", 0)},
        num_at(t, "c"));
  }
  return f;
}

crossbif::Tolerances parse_tolerances(const ordered_json& cfg, const CliOptions& cli) {
  crossbif::Tolerances tol;
  if (cfg.contains("tolerances")) {
    const std::string preset = str_at(cfg, "tolerances");
    if (preset == "analytic")
      tol = crossbif::Tolerances::analytic();
    else if (preset == "numerical")
      tol = crossbif::Tolerances::numerical();
    else
      fail(errc::config_invalid, "tolerances preset must be analytic or numerical");
  }
  for (const std::string& ov : cli.tol_overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      fail(errc::config_invalid, "--tol expects name=value, got '" + ov + "'");
    const std::string name = ov.substr(0, eq);
    double value = 0;
    try {
      value = std::stod(ov.substr(eq + 1));
    } catch (const std::exception&) {
      fail(errc::config_invalid, "--tol value in '" + ov + "' is not a number");
    }
    if (name == "fixed_point")
      tol.fixed_point = value;
    else if (name == "trace_unit")
      tol.trace_unit = value;
    else if (name == "identity")
      tol.identity = value;
    else if (name == "rank2")
      tol.rank2 = value;
    else if (name == "hessian_scale")
      tol.hessian_scale = value;
    else if (name == "p_qq")
      tol.p_qq = value;
    else if (name == "fork_criterion")
      tol.fork_criterion = value;
    else if (name == "newton")
      tol.newton = value;
    else if (name == "symplectic")
      tol.symplectic = value;
    else if (name == "qp_min")
      tol.qp_min = value;
    else if (name == "frame_residual")
      tol.frame_residual = value;
    else
      fail(errc::config_invalid, "unknown tolerance name '" + name + "'");
  }
  return tol;
}

crossbif::Point3 parse_point(const ordered_json& cfg, const char* key, const CliOptions& cli) {
  crossbif::Point3 pt{0, 0, 0};
  if (cfg.contains(key)) {
    require_keys(cfg[key], key, {"q", "p", "eps"});
    pt.q = num_at(cfg[key], "q", 0.0);
    pt.p = num_at(cfg[key], "p", 0.0);
    pt.eps = num_at(cfg[key], "eps", 0.0);
  }
  if (cli.seed_eps) pt.eps = *cli.seed_eps;
  return pt;
}

// ---------------------------------------------------------------------------
// report assembly

ordered_json report_scaffold(const std::string& mode, const ordered_json& config) {
  ordered_json j;
  j["schema"] = kSchemaTag;
  j["version"] = kVersion;
  j["mode"] = mode;
  j["config"] = config;
  return j;
}

ordered_json json_from_branch(const crossbif::Branch& br, const std::string& csv_name) {
  ordered_json j;
  j["parametrization"] = br.parametrization == crossbif::BranchParam::by_eps ? "eps" : "q";
  j["samples"] = br.samples.size();
  j["csv"] = csv_name;
  j["q_slope"] = br.q_slope;
  j["p_slope"] = br.p_slope;
  j["trace_slope"] = br.trace_slope;
  j["eps_second"] = br.eps_second;
  j["p_second"] = br.p_second;
  if (br.tangent)
    j["tangent"] = {(*br.tangent)[0], (*br.tangent)[1], (*br.tangent)[2]};
  else
    j["tangent"] = nullptr;
  j["truncated_low"] = br.lower.truncated ? ordered_json(br.lower.reason) : ordered_json(nullptr);
  j["truncated_high"] = br.upper.truncated ? ordered_json(br.upper.reason) : ordered_json(nullptr);
  return j;
}

ordered_json json_from_orbit(const crossbif::LibratingOrbit& orbit) {
  ordered_json j;
  j["energy"] = orbit.energy;
  j["T"] = orbit.T;
  j["period_quadrature"] = orbit.period_quadrature;
  j["y1"] = orbit.y1;
  j["y2"] = orbit.y2;
  j["y_start"] = orbit.y_start;
  j["py_start"] = orbit.py_start;
  return j;
}

ordered_json json_from_monodromy(const crossbif::MonodromyData& m) {
  ordered_json j;
  j["phiT"] = m.phi_T;
  j["psiT"] = m.psi_T;
  j["dphiT"] = m.dphi_T;
  j["dpsiT"] = m.dpsi_T;
  j["trace"] = m.phi_T + m.dpsi_T;
  j["wronskian_defect"] = m.wronskian_defect;
  return j;
}

// ---------------------------------------------------------------------------
// mode runners; each returns the files to write so nothing lands on disk
// when a later stage fails

struct OutputSet {
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
};

OutputSet run_classify_map(const ordered_json& cfg, const CliOptions& cli) {
  require_keys(cfg, "config", {"family", "point", "tolerances", "destruction_check"});
  const auto family = parse_family(obj_at(cfg, "family"));
  const crossbif::Tolerances tol = parse_tolerances(cfg, cli);
  const crossbif::Point3 pt = parse_point(cfg, "point", cli);
  const bool want_destruction = bool_at(cfg, "destruction_check", false);

  ordered_json rep = report_scaffold("classify-map", cfg);
  rep["point"] = {pt.q, pt.p, pt.eps};
  rep["classification"] = crossbif::json_from_report(crossbif::classify(family, pt, tol));
  if (want_destruction) {
    const crossbif::MapDestructionCheck check =
        crossbif::destruction_check_map(family, pt, tol);
    ordered_json d;
    d["delta_vector"] = {check.delta_vector_world.x, check.delta_vector_world.y};
    d["delta_vector_adapted"] = {check.delta_vector_adapted.x, check.delta_vector_adapted.y};
    d["in_eigenspace"] = check.in_eigenspace;
    d["destroys"] = check.destroys;
    d["scaled_hessian"] = {{check.scaled_hessian.a, check.scaled_hessian.b},
                           {check.scaled_hessian.c, check.scaled_hessian.d}};
    d["hessian_nondegenerate"] = check.hessian_nondegenerate;
    rep["destruction"] = d;
  }
  return {{{"report.json", rep.dump(2) + "\n"}}};
}

OutputSet run_continue(const ordered_json& cfg, const CliOptions& cli) {
  require_keys(cfg, "config", {"family", "seed", "step", "range", "tolerances"});
  const auto family = parse_family(obj_at(cfg, "family"));
  const crossbif::Tolerances tol = parse_tolerances(cfg, cli);
  const crossbif::Point3 seed = parse_point(cfg, "seed", cli);
  const double step = num_at(cfg, "step", 0.01);
  const double range = num_at(cfg, "range", 0.25);

  crossbif::BranchPair pair = crossbif::split_cross_branches(family, seed, tol, step, range);
  const crossbif::TraceSlopeCheck slopes = crossbif::trace_slope_sum(pair.a, pair.b);

  ordered_json rep = report_scaffold("continue", cfg);
  rep["seed"] = {seed.q, seed.p, seed.eps};
  rep["kind"] =
      crossbif::kind_name(crossbif::classify(family, seed, tol).kind);
  rep["branch_a"] = json_from_branch(pair.a, "branch_a.csv");
  rep["branch_b"] = json_from_branch(pair.b, "branch_b.csv");
  rep["trace_slope_sum"] = {{"slope_a", slopes.slope_a},
                            {"slope_b", slopes.slope_b},
                            {"residual", slopes.residual}};
  if (pair.b.parametrization == crossbif::BranchParam::by_q) {
    const crossbif::ForkTraceCheck fork =
        crossbif::fork_trace_relation(family, pair.a, pair.b);
    rep["fork_trace_relation"] = {{"slope_a", fork.slope_a},
                                  {"slope_b_limit", fork.slope_b_limit},
                                  {"residual", fork.residual}};
  }

  std::vector<crossbif::CrossingReport> crossings =
      crossbif::find_trace2_crossings(family, pair.a, tol);
  ordered_json jcross = ordered_json::array();
  for (const crossbif::CrossingReport& c : crossings)
    jcross.push_back({{"eps_star", c.eps_star},
                      {"trace_slope", c.trace_slope},
                      {"kind", crossbif::kind_name(c.classification.kind)}});
  rep["crossings"] = jcross;

  OutputSet out;
  out.files.emplace_back("report.json", rep.dump(2) + "\n");
  out.files.emplace_back("branch_a.csv", crossbif::csv_from_branch(pair.a));
  out.files.emplace_back("branch_b.csv", crossbif::csv_from_branch(pair.b));
  return out;
}

crossbif::PoincareContext context_from_config(const ordered_json& cfg) {
  crossbif::HamiltonianSystem h = parse_potential(obj_at(cfg, "potential"));
  crossbif::SectionSpec section;
  if (cfg.contains("section_y0")) section.y0 = num_at(cfg, "section_y0");
  crossbif::PoincareContext ctx =
      crossbif::make_poincare_context(std::move(h), section, num_at(cfg, "e0"));
  if (cfg.contains("chart_bound")) ctx.chart_bound = num_at(cfg, "chart_bound");
  return ctx;
}

OutputSet run_libration_scan(const ordered_json& cfg, const CliOptions& cli) {
  require_keys(cfg, "config",
               {"potential", "section_y0", "e0", "eps_range", "samples", "chart_bound"});
  crossbif::PoincareContext ctx = context_from_config(cfg);
  auto [lo, hi] = range_at(cfg, "eps_range");
  if (cli.seed_eps) {  // recenter the scan window on the given eps
    const double half = (hi - lo) / 2;
    lo = *cli.seed_eps - half;
    hi = *cli.seed_eps + half;
  }
  const int n = int_at(cfg, "samples");

  const crossbif::ScanResult scan =
      crossbif::libration_branch_scan(ctx, lo, hi, n, crossbif::threads_from_env());

  ordered_json rep = report_scaffold("libration-scan", cfg);
  rep["section"] = {{"y0", ctx.section.y0}, {"e0", ctx.e0}, {"t_ref", ctx.t_ref}};
  rep["rows"] = scan.rows.size();
  rep["csv"] = "scan.csv";
  rep["degenerate_flat_trace"] = scan.degenerate_flat_trace;
  rep["notes"] = scan.notes;
  ordered_json jcross = ordered_json::array();
  for (const crossbif::TraceCrossing& c : scan.crossings) {
    ordered_json e;
    e["eps_star"] = c.eps_star;
    e["trace_slope"] = c.trace_slope;
    if (c.report)
      e["classification"] = crossbif::json_from_report(*c.report);
    else
      e["classification_error"] = c.classify_error;
    jcross.push_back(e);
  }
  rep["crossings"] = jcross;

  OutputSet out;
  out.files.emplace_back("report.json", rep.dump(2) + "\n");
  out.files.emplace_back("scan.csv", crossbif::csv_from_scan(scan.rows));
  return out;
}

OutputSet run_monodromy(const ordered_json& cfg, const CliOptions& cli) {
  require_keys(cfg, "config",
               {"potential", "section_y0", "e0", "eps", "compare_fd", "chart_bound"});
  crossbif::PoincareContext ctx = context_from_config(cfg);
  const double eps = cli.seed_eps ? *cli.seed_eps : num_at(cfg, "eps", 0.0);

  const crossbif::ReducedSystem r = crossbif::reduced_system(ctx.h);
  const crossbif::LibratingOrbit orbit =
      crossbif::find_libration(r, ctx.section.y0, ctx.e0 + eps);
  const crossbif::MonodromyData mono = crossbif::fundamental_system(r, orbit);

  ordered_json rep = report_scaffold("monodromy", cfg);
  rep["eps"] = eps;
  rep["orbit"] = json_from_orbit(orbit);
  rep["monodromy"] = json_from_monodromy(mono);

  if (bool_at(cfg, "compare_fd", true)) {
    const crossbif::PoincareFamily family(ctx);
    const crossbif::DerivativeJet jet = family.jet({0, 0, eps}, 1);
    const crossbif::Mat2 j = jet.jacobian();
    const crossbif::Mat2 diff{j.a - mono.phi_T, j.b - mono.psi_T, j.c - mono.dphi_T,
                              j.d - mono.dpsi_T};
    rep["fd_jacobian"] = {{"matrix", {{j.a, j.b}, {j.c, j.d}}},
                          {"max_diff", diff.norm_inf()},
                          {"det_defect", std::fabs(j.det() - 1.0)}};
  }
  return {{{"report.json", rep.dump(2) + "\n"}}};
}

OutputSet run_perturb_check(const ordered_json& cfg, const CliOptions& cli) {
  require_keys(cfg, "config",
               {"potential", "section_y0", "e0", "eps_star", "perturbations", "smoke"});
  crossbif::HamiltonianSystem h = parse_potential(obj_at(cfg, "potential"));
  const crossbif::ReducedSystem r = crossbif::reduced_system(h);
  const double y0 = cfg.contains("section_y0") ? num_at(cfg, "section_y0")
                                               : crossbif::default_section_y(r);
  const double e0 = num_at(cfg, "e0");
  const double eps_star = cli.seed_eps ? *cli.seed_eps : num_at(cfg, "eps_star", 0.0);

  const crossbif::LibratingOrbit orbit = crossbif::find_libration(r, y0, e0 + eps_star);
  const crossbif::MonodromyData mono = crossbif::fundamental_system(r, orbit);

  if (!cfg.contains("perturbations") || !cfg["perturbations"].is_array() ||
      cfg["perturbations"].empty())
    fail(errc::config_invalid, "perturb-check needs a nonempty 'perturbations' array");
  std::vector<crossbif::Poly> terms;
  for (const auto& jt : cfg["perturbations"]) terms.push_back(parse_perturbation(jt));

  const crossbif::Poly rotation = crossbif::perturbation_named("rotation");
  std::vector<crossbif::DestructionReport> reports(terms.size());
  crossbif::parallel_for(terms.size(), crossbif::threads_from_env(), [&](size_t i) {
    const bool is_rotation = (terms[i] - rotation).zero();
    reports[i] = is_rotation ? crossbif::rotation_case(r, orbit, mono)
                             : crossbif::destruction_report(r, orbit, mono, terms[i]);
  });

  ordered_json rep = report_scaffold("perturb-check", cfg);
  rep["eps_star"] = eps_star;
  rep["orbit"] = json_from_orbit(orbit);
  rep["monodromy"] = json_from_monodromy(mono);
  ordered_json jterms = ordered_json::array();
  for (size_t i = 0; i < terms.size(); ++i) {
    const ordered_json& jt = cfg["perturbations"][i];
    ordered_json e;
    e["label"] = jt.contains("name") ? jt["name"].get<std::string>()
                                     : "terms[" + std::to_string(i) + "]";
    e["cross_preserving"] = crossbif::is_cross_preserving(
        terms[i], orbit.y1 - 0.5, orbit.y2 + 0.5, orbit.py_start + 0.5);
    e["report"] = crossbif::json_from_destruction(reports[i]);
    jterms.push_back(e);
  }
  rep["perturbations"] = jterms;

  if (cfg.contains("smoke")) {
    const ordered_json& js = cfg["smoke"];
    require_keys(js, "smoke", {"term", "delta", "eps_range", "samples"});
    if (!js.contains("term"))
      fail(errc::config_invalid, "smoke needs a 'term' perturbation");
    const crossbif::Poly f = parse_perturbation(js["term"]);
    const auto [lo, hi] = range_at(js, "eps_range");
    const crossbif::PreservationCheck smoke = crossbif::preservation_smoke(
        h, f, num_at(js, "delta", 0.01), y0, e0, lo, hi, int_at(js, "samples", 25));
    ordered_json e;
    e["delta"] = smoke.delta;
    e["base_eps"] = smoke.base_eps;
    e["plus_eps"] = smoke.plus_eps;
    e["minus_eps"] = smoke.minus_eps;
    e["base_slope"] = smoke.base_slope;
    e["plus_slope"] = smoke.plus_slope;
    e["minus_slope"] = smoke.minus_slope;
    e["persists"] = smoke.persists;
    e["midpoint_shift"] =
        std::fabs(0.5 * (smoke.plus_eps + smoke.minus_eps) - smoke.base_eps);
    rep["smoke"] = e;
  }
  return {{{"report.json", rep.dump(2) + "\n"}}};
}

int run_mode(const std::string& mode, const CliOptions& cli) {
  std::ifstream in(cli.config_path);
  if (!in) fail(errc::config_invalid, "cannot open config " + cli.config_path);
  ordered_json cfg;
  try {
    cfg = ordered_json::parse(in);
  } catch (const std::exception& e) {
    fail(errc::config_invalid, std::string("config is not valid JSON: ") + e.what());
  }

  OutputSet out;
  if (mode == "classify-map")
    out = run_classify_map(cfg, cli);
  else if (mode == "continue")
    out = run_continue(cfg, cli);
  else if (mode == "libration-scan")
    out = run_libration_scan(cfg, cli);
  else if (mode == "monodromy")
    out = run_monodromy(cfg, cli);
  else if (mode == "perturb-check")
    out = run_perturb_check(cfg, cli);

  for (const auto& [name, content] : out.files)
    crossbif::write_file_atomic(fs::path(cli.out_dir) / name, content);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bifurcation analysis of one-parameter symplectic map families"};
  app.require_subcommand(1);

  CliOptions cli;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cli.config_path, "JSON config path")->required();
    sub->add_option("--out", cli.out_dir, "output directory (default: current)");
    sub->add_option("--seed-eps", cli.seed_eps, "override the seed/scan eps");
    sub->add_option("--tol", cli.tol_overrides, "tolerance override name=value");
  };
  for (const char* mode :
       {"classify-map", "continue", "libration-scan", "monodromy", "perturb-check"})
    add_common(app.add_subcommand(mode));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ordered_json err{{"error", "ConfigInvalid"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    return run_mode(mode, cli);
  } catch (const crossbif::Error& e) {
    ordered_json err{{"error", crossbif::errc_name(e.code())}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return e.code() == errc::config_invalid ? 2 : 3;
  } catch (const std::exception& e) {
    ordered_json err{{"error", "Internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
}
