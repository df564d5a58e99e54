#include "coiso/commands.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "coiso/errors.hpp"
#include "coiso/linfty.hpp"
#include "coiso/sampling.hpp"
#include "coiso/transversal.hpp"

namespace coiso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const char* verdict_name(bool pass) { return pass ? "pass" : "fail"; }

// fail beats flagged beats pass.
std::string combine(const Json& checks) {
  std::string out = "pass";
  for (const auto& c : checks) {
    const auto v = c.at("verdict").get<std::string>();
    if (v == "fail")
      return "fail";
    if (v == "flagged")
      out = "flagged";
  }
  return out;
}

CommandResult finish(Json report, Clock::time_point start) {
  report["verdict"] = combine(report.at("checks"));
  report["wall_time_s"] = seconds_since(start);
  const int code = report["verdict"] == "pass" ? kExitPass : kExitFail;
  return {std::move(report), code};
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& tag) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Json validation_checks(const ChartSpec& chart) {
  Json checks = Json::array();
  const auto v = validate_chart(chart);
  checks.push_back(Json{{"check", "poisson"},
                        {"verdict", verdict_name(v.poisson_residual.is_zero())},
                        {"residual", multivector_to_json(v.poisson_residual)}});
  Json proj{{"check", "projection"},
            {"verdict", verdict_name(v.projection_residual.is_zero())},
            {"residual", multivector_to_json(v.projection_residual)}};
  if (!v.projection_residual.is_zero())
    proj["message"] = "zero section not coisotropic";
  checks.push_back(std::move(proj));
  if (chart.adapted()) {
    const auto a = check_adapted(chart);
    checks.push_back(Json{{"check", "adapted"},
                          {"verdict", verdict_name(a.valid())},
                          {"difference", multivector_to_json(a.difference)}});
  }
  return checks;
}

Json mc_check(const ChartSpec& chart, const Section& s, unsigned max_order, const std::string& label,
              std::optional<bool> expected_coisotropic) {
  const auto report = mc_series(chart, s, max_order);
  const auto cert = is_coisotropic(chart, s);
  const bool consistent = report.is_zero == cert.coisotropic && report.oracle_agrees &&
                          report.order_terminated <= report.order_bound &&
                          (!expected_coisotropic || *expected_coisotropic == cert.coisotropic);
  Json check{{"check", "mc " + label},
             {"verdict", !report.terminated ? "flagged" : verdict_name(consistent)},
             {"section", section_to_json(chart, s)},
             {"coisotropic", cert.coisotropic},
             {"mc", mc_report_to_json(report)}};
  if (expected_coisotropic)
    check["expected_coisotropic"] = *expected_coisotropic;
  return check;
}

struct PathResult {
  std::string name;
  SectionGrid section;
  bool non_graph = false;
  double fit_residual = 0.0;
};

Json comparison(const std::string& what, const SectionGrid& a, const SectionGrid& b, double tol, bool non_graph) {
  const auto rep = compare_sections(a, b);
  std::size_t worst = 0;
  for (std::size_t i = 0; i < rep.per_node.size(); ++i)
    if (rep.per_node[i] > rep.per_node[worst])
      worst = i;
  std::vector<double> x(a.grid.dim());
  a.grid.coords(worst, x);
  return Json{{"check", what},
              {"verdict", verdict_name(rep.sup_error <= tol && !non_graph)},
              {"sup_error", rep.sup_error},
              {"tolerance", tol},
              {"worst_node", x},
              {"non_graph", non_graph}};
}

} // namespace

CommandResult cmd_validate(const ChartSpec& chart) {
  const auto start = Clock::now();
  Json report{{"command", "validate"}, {"chart", chart.name()}};
  report["checks"] = validation_checks(chart);
  return finish(std::move(report), start);
}

CommandResult cmd_mc(const ChartSpec& chart, const Section& s, unsigned max_order) {
  const auto start = Clock::now();
  Json report{{"command", "mc"}, {"chart", chart.name()}, {"max_order", max_order}};
  Json checks = validation_checks(chart);
  if (combine(checks) == "pass")
    checks.push_back(mc_check(chart, s, max_order, "section", std::nullopt));
  report["checks"] = std::move(checks);
  return finish(std::move(report), start);
}

CommandResult cmd_coiso(const ChartSpec& chart, const Section& s) {
  const auto start = Clock::now();
  const auto cert = is_coisotropic(chart, s);
  Json nonzero = Json::array();
  for (const auto& e : cert.nonzero) {
    const auto& vars = *chart.vars();
    nonzero.push_back(Json{{"j", vars[chart.fibre()[e.j]].name},
                           {"k", vars[chart.fibre()[e.k]].name},
                           {"value", e.value.to_string()}});
  }
  Json report{{"command", "coiso"}, {"chart", chart.name()}, {"section", section_to_json(chart, s)}};
  report["checks"] = Json::array(
      {Json{{"check", "coisotropic"}, {"verdict", verdict_name(cert.coisotropic)}, {"certificate", nonzero}}});
  return finish(std::move(report), start);
}

CommandResult cmd_flow(const ChartSpec& chart, const FlowRequest& request) {
  const auto start = Clock::now();
  const FlowConfig& cfg = request.cfg;
  cfg.validate();
  validate_section(chart, request.initial);
  if (request.family.has_value() == request.oneform.has_value())
    throw InputError("flow needs exactly one of a family or a one-form");

  Json report{{"command", "flow"}, {"chart", chart.name()}, {"mode", to_string(request.mode)}};
  report["config"] = flow_config_to_json(cfg);
  report["steps"] = cfg.steps();
  report["initial"] = section_to_json(chart, request.initial);
  Json checks = Json::array();

  Multivector generator(chart.vars(), 1);
  if (request.family) {
    require_same_vars(chart.vars(), request.family->vars());
    if (request.family->depends_on_kind(VarKind::fibre))
      throw InputError("family must depend on base variables and t only");
    report["family"] = request.family->to_string();
    generator = hamiltonian_vf(chart, *request.family);
  } else {
    const OneForm& beta = *request.oneform;
    report["oneform"] = oneform_to_json(beta);
    if (!is_closed(beta))
      throw InputError("one-form is not closed");
    generator = contract(chart.pi(), beta);
    const Rational t1 = to_rational(cfg.t1);
    for (const Rational& t : std::vector<Rational>{Rational(0), Rational(t1 / 2), t1}) {
      const std::size_t tv = chart.time();
      if (!centralizer_check(chart, generator.map_coefficients([&](const ScalarFn& c) { return c.substitute(tv, t); })))
        throw InputError("vector field of the one-form does not commute with pi at t = " + rational_to_string(t));
    }
    checks.push_back(Json{{"check", "closed and Poisson"}, {"verdict", "pass"}});
  }
  report["generator"] = multivector_to_json(generator);

  const Grid grid = config_grid(chart, cfg);
  report["grid"] = grid.nodes;
  const SectionGrid s0 = sample_section(chart, request.initial, grid);

  std::vector<PathResult> paths;
  auto run_pde = [&] {
    SectionGrid s = request.family ? gauge_transport(chart, s0, *request.family, cfg)
                                   : extended_gauge_transport(chart, s0, generator, cfg);
    paths.push_back({"pde", std::move(s)});
  };
  auto run_graph = [&] {
    const PointCloud cloud = flow_graph(chart, request.initial, generator, cfg);
    auto rec = reconstruct_section(cloud, grid, cfg);
    paths.push_back({"graph", std::move(rec.section), rec.non_graph, rec.max_fit_residual});
  };

  switch (request.mode) {
  case FlowMode::pde:
    run_pde();
    break;
  case FlowMode::graph:
    run_graph();
    break;
  case FlowMode::both:
    run_pde();
    run_graph();
    checks.push_back(comparison("pde vs graph", paths[0].section, paths[1].section, cfg.tol_graph, paths[1].non_graph));
    break;
  case FlowMode::transversal: {
    if (!request.family)
      throw InputError("transversal mode needs a family");
    if (!chart.adapted())
      throw InputError("transversal mode needs a chart with adapted metadata");
    for (const auto& c : request.initial.components)
      if (!c.is_zero())
        throw InputError("transversal mode starts from the zero section");
    if (cfg.t1 != 1.0)
      throw InputError("transversal mode integrates over t in [0, 1]");
    validate_adapted(chart);
    paths.push_back({"transversal", transversal_flow_section(chart, *request.family, cfg)});
    if (chart.fibre_dim() == 1) {
      paths.push_back({"hypersurface", hypersurface_section(chart, *request.family, cfg)});
      checks.push_back(comparison("transversal vs hypersurface", paths[0].section, paths[1].section, 1e-9, false));
    } else {
      run_pde();
      checks.push_back(comparison("transversal vs pde", paths[0].section, paths[1].section, cfg.tol_graph, false));
    }
    break;
  }
  }

  Json path_info = Json::array();
  for (const auto& p : paths) {
    Json info{{"path", p.name}};
    if (p.name == "graph") {
      info["non_graph"] = p.non_graph;
      info["max_fit_residual"] = p.fit_residual;
      if (p.non_graph)
        checks.push_back(Json{{"check", "graph reconstruction"}, {"verdict", "fail"}, {"non_graph", true}});
    }
    path_info.push_back(std::move(info));
  }
  report["paths"] = std::move(path_info);

  if (request.expected) {
    const SectionGrid exact = sample_section(chart, *request.expected, grid);
    report["expected"] = section_to_json(chart, *request.expected);
    for (const auto& p : paths)
      checks.push_back(comparison(p.name + " vs closed form", p.section, exact, cfg.tol_graph, p.non_graph));
  }
  report["checks"] = std::move(checks);
  return finish(std::move(report), start);
}

CommandResult cmd_scenario(const std::string& name, std::uint64_t seed) {
  const auto start = Clock::now();
  const Scenario sc = make_scenario(name);
  const ChartSpec& chart = sc.chart;
  const std::uint64_t local_seed = mix_seed(seed, name);
  Json report{{"command", "scenario"}, {"scenario", name}, {"seed", seed}, {"chart", chart_to_json(chart)}};

  Json checks = validation_checks(chart);
  for (const auto& c : sc.sections)
    checks.push_back(mc_check(chart, c.section, 32, c.label, c.coisotropic));

  {
    Sampler sampler(local_seed);
    const unsigned samples = 10;
    std::size_t agree = 0, flagged = 0;
    for (unsigned i = 0; i < samples; ++i) {
      const Json c = mc_check(chart, sampler.section(chart, 2), 32, "random", std::nullopt);
      agree += c.at("verdict") == "pass";
      flagged += c.at("verdict") == "flagged";
    }
    checks.push_back(Json{{"check", "mc random sections"},
                          {"verdict", agree == samples ? "pass" : (agree + flagged == samples ? "flagged" : "fail")},
                          {"samples", samples},
                          {"consistent", agree}});
  }

  {
    const auto j = jacobi_suite(chart, 3, 5, local_seed + 1);
    checks.push_back(Json{{"check", "l-infinity identities"},
                          {"verdict", verdict_name(j.ok())},
                          {"seed", j.seed},
                          {"identity_checks", j.identity_checks},
                          {"symmetry_checks", j.symmetry_checks},
                          {"max_residual_terms", j.max_residual_terms}});
  }

  if (chart.adapted()) {
    const auto d = dgla_residual(chart, 10, local_seed + 2);
    checks.push_back(Json{{"check", "dgla collapse"},
                          {"verdict", verdict_name(d.ok())},
                          {"seed", d.seed},
                          {"higher_checks", d.higher_checks},
                          {"bracket_checks", d.bracket_checks},
                          {"max_residual_terms", d.max_residual_terms}});
    Sampler sampler(local_seed + 3);
    std::size_t worst = 0;
    for (int i = 0; i < 10; ++i)
      worst = std::max(worst, splitting_check(chart, sampler.base_function(chart, 3)).size());
    checks.push_back(Json{{"check", "splitting"}, {"verdict", verdict_name(worst == 0)}, {"max_residual_terms", worst}});
  }

  Json flows = Json::array();
  for (const auto& f : sc.flows) {
    FlowRequest req{f.mode, f.family, f.oneform, f.initial, f.cfg, f.expected};
    auto result = cmd_flow(chart, req);
    result.report.erase("wall_time_s");
    result.report["label"] = f.label;
    checks.push_back(Json{{"check", "flow " + f.label + " [" + to_string(f.mode) + "]"},
                          {"verdict", result.report.at("verdict")}});
    flows.push_back(std::move(result.report));
  }
  report["flows"] = std::move(flows);
  report["checks"] = std::move(checks);
  return finish(std::move(report), start);
}

CommandResult cmd_scenario_all(std::uint64_t seed) {
  const auto start = Clock::now();
  Json report{{"command", "scenario --all"}, {"seed", seed}};
  Json scenarios = Json::array();
  Json checks = Json::array();
  for (const auto& name : scenario_names()) {
    auto result = cmd_scenario(name, seed);
    checks.push_back(Json{{"check", name},
                          {"verdict", result.report.at("verdict")},
                          {"wall_time_s", result.report.at("wall_time_s")}});
    scenarios.push_back(std::move(result.report));
  }
  report["scenarios"] = std::move(scenarios);
  report["checks"] = std::move(checks);
  return finish(std::move(report), start);
}

std::string summary_csv(const Json& report) {
  std::ostringstream out;
  out << "scenario,check,verdict,value\n";
  auto quote = [](std::string s) {
    if (s.find_first_of(",\"") == std::string::npos)
      return s;
    std::string q = "\"";
    for (char c : s)
      q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  auto emit = [&](const std::string& scope, const Json& r) {
    for (const auto& c : r.at("checks")) {
      std::string value;
      for (const char* key : {"sup_error", "max_residual_terms", "consistent"})
        if (c.contains(key)) {
          value = c.at(key).dump();
          break;
        }
      out << quote(scope) << ',' << quote(c.at("check").get<std::string>()) << ','
          << c.at("verdict").get<std::string>() << ',' << value << '\n';
    }
  };
  if (report.contains("scenarios")) {
    for (const auto& sc : report.at("scenarios")) {
      emit(sc.at("scenario").get<std::string>(), sc);
      for (const auto& f : sc.at("flows"))
        emit(sc.at("scenario").get<std::string>() + "/" + f.at("label").get<std::string>(), f);
    }
  } else {
    const std::string scope = report.contains("scenario") ? report.at("scenario").get<std::string>()
                                                          : report.value("chart", std::string("chart"));
    emit(scope, report);
    if (report.contains("flows"))
      for (const auto& f : report.at("flows"))
        emit(scope + "/" + f.at("label").get<std::string>(), f);
  }
  return out.str();
}

Json strip_timing(Json report) {
  if (report.is_object()) {
    report.erase("wall_time_s");
    for (auto& [key, value] : report.items())
      value = strip_timing(std::move(value));
  } else if (report.is_array()) {
    for (auto& value : report)
      value = strip_timing(std::move(value));
  }
  return report;
}

} // namespace coiso
