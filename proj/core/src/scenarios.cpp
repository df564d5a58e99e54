#include "coiso/scenarios.hpp"

#include "coiso/errors.hpp"

namespace coiso {

namespace {

Section make_section(const ChartSpec& chart, const std::vector<std::string>& components) {
  Section s{chart.vars(), {}};
  for (const auto& c : components)
    s.components.push_back(chart.parse(c));
  validate_section(chart, s);
  return s;
}

Multivector frame_bivector(const VarSetPtr& vars, const std::vector<std::pair<std::string, std::string>>& pairs) {
  Multivector pi(vars, 2);
  for (const auto& [a, b] : pairs)
    pi += wedge(Multivector::direction(vars, vars->index(a)), Multivector::direction(vars, vars->index(b)));
  return pi;
}

} // namespace

ChartSpec lagrangian_chart(std::size_t n) {
  std::vector<std::string> base, fibre;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 1; i <= n; ++i) {
    base.push_back("x" + std::to_string(i));
    fibre.push_back("p" + std::to_string(i));
    pairs.emplace_back(base.back(), fibre.back());
  }
  const auto vars = chart_vars(base, fibre);
  return ChartSpec("lagrangian_n" + std::to_string(n), vars, frame_bivector(vars, pairs),
                   std::vector<Interval>(n, Interval{-1.0, 1.0}));
}

ChartSpec torus_chart() {
  const auto vars = chart_vars({"th1", "th2", "th3"}, {"x4"});
  const std::vector<std::size_t> dirs{0, 1, 2, 3};
  const RationalMatrix omega{{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};
  AdaptedMeta meta{{0, 1}, {2}, {{0, 1}, {-1, 0}}};
  return ChartSpec("torus", vars, invert_constant_symplectic(vars, dirs, omega),
                   std::vector<Interval>(3, Interval{-1.0, 1.0}), meta);
}

ChartSpec hypersurface_chart() {
  const auto vars = chart_vars({"y1", "y2", "q"}, {"u"});
  AdaptedMeta meta{{0, 1}, {2}, {{0, 1}, {-1, 0}}};
  return ChartSpec("hypersurface", vars, frame_bivector(vars, {{"y1", "y2"}, {"q", "u"}}),
                   {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}, Interval{-0.1, 0.1}}, meta);
}

std::string to_string(FlowMode mode) {
  switch (mode) {
  case FlowMode::pde:
    return "pde";
  case FlowMode::graph:
    return "graph";
  case FlowMode::both:
    return "both";
  case FlowMode::transversal:
    return "transversal";
  }
  return "both";
}

FlowMode flow_mode_from_string(const std::string& text) {
  if (text == "pde")
    return FlowMode::pde;
  if (text == "graph")
    return FlowMode::graph;
  if (text == "both")
    return FlowMode::both;
  if (text == "transversal")
    return FlowMode::transversal;
  throw InputError("unknown flow mode '" + text + "' (expected pde, graph, both or transversal)");
}

std::vector<std::string> scenario_names() { return {"lagrangian_n1", "lagrangian_n2", "torus", "hypersurface"}; }

Scenario make_scenario(const std::string& name) {
  if (name == "lagrangian_n1") {
    Scenario sc{name, lagrangian_chart(1), {}, {}};
    const auto& c = sc.chart;
    sc.sections.push_back({"x1^2", make_section(c, {"x1^2"}), true});
    sc.sections.push_back({"1/2*x1 - 1/3", make_section(c, {"1/2*x1 - 1/3"}), true});
    CannedFlow flow{"f = x1^2*t", FlowMode::both, c.parse("x1^2*t"), std::nullopt, make_section(c, {"x1"}), {}, {}};
    flow.expected = make_section(c, {"0"});
    sc.flows.push_back(std::move(flow));
    return sc;
  }
  if (name == "lagrangian_n2") {
    Scenario sc{name, lagrangian_chart(2), {}, {}};
    const auto& c = sc.chart;
    sc.sections.push_back({"(x2, x1)", make_section(c, {"x2", "x1"}), true});
    sc.sections.push_back({"(x2, 0)", make_section(c, {"x2", "0"}), false});
    sc.sections.push_back({"(2*x1*x2, x1^2)", make_section(c, {"2*x1*x2", "x1^2"}), true});
    CannedFlow flow{"f = x1*x2", FlowMode::both, c.parse("x1*x2"), std::nullopt, zero_section(c), {}, {}};
    flow.expected = make_section(c, {"-x2", "-x1"});
    sc.flows.push_back(std::move(flow));
    return sc;
  }
  if (name == "torus") {
    Scenario sc{name, torus_chart(), {}, {}};
    const auto& c = sc.chart;
    sc.sections.push_back({"x4 = 1/2", make_section(c, {"1/2"}), true});
    sc.sections.push_back({"x4 = th1*th3", make_section(c, {"th1*th3"}), true});
    OneForm beta{c.vars(), {}};
    beta.components.insert_or_assign(c.vars()->index("th3"), ScalarFn(c.vars(), 1));
    CannedFlow flow{"beta = dth3", FlowMode::both, std::nullopt, beta, zero_section(c), {}, {}};
    flow.cfg.t1 = 0.5;
    flow.cfg.dt = 1e-2;
    flow.expected = make_section(c, {"-1/2"});
    sc.flows.push_back(std::move(flow));
    return sc;
  }
  if (name == "hypersurface") {
    Scenario sc{name, hypersurface_chart(), {}, {}};
    const auto& c = sc.chart;
    sc.sections.push_back({"u = y1*q + y2^2", make_section(c, {"y1*q + y2^2"}), true});
    CannedFlow both{"f = q*y1", FlowMode::both, c.parse("q*y1"), std::nullopt, zero_section(c), {}, {}};
    both.expected = make_section(c, {"-y1"});
    CannedFlow closed = both;
    closed.mode = FlowMode::transversal;
    sc.flows.push_back(std::move(both));
    sc.flows.push_back(std::move(closed));
    return sc;
  }
  throw InputError("unknown scenario '" + name + "'");
}

} // namespace coiso
