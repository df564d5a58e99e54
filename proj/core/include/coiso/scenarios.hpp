#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coiso/chart.hpp"
#include "coiso/flow.hpp"
#include "coiso/multivector.hpp"

namespace coiso {

// T*R^n with base x1..xn, fibre p1..pn and pi = sum_i dx_i ^ dp_i.
ChartSpec lagrangian_chart(std::size_t n);

// Local chart of T^3 x R with omega = dth1^dth2 + dth3^dx4; adapted with
// leaf (th1, th2) and kernel th3 conjugate to the fibre x4.
ChartSpec torus_chart();

// Hypersurface model: base (y1, y2, q), fibre u, omega = dy1^dy2 + dq^du,
// box q in [-0.1, 0.1].
ChartSpec hypersurface_chart();

struct CannedSection {
  std::string label;
  Section section;
  bool coisotropic = false;
};

enum class FlowMode { pde, graph, both, transversal };

std::string to_string(FlowMode mode);
FlowMode flow_mode_from_string(const std::string& text);

struct CannedFlow {
  std::string label;
  FlowMode mode = FlowMode::both;
  // Exactly one of family / oneform is set.
  std::optional<ScalarFn> family;
  std::optional<OneForm> oneform;
  Section initial;
  FlowConfig cfg;
  // Closed-form endpoint, when known.
  std::optional<Section> expected;
};

struct Scenario {
  std::string name;
  ChartSpec chart;
  std::vector<CannedSection> sections;
  std::vector<CannedFlow> flows;
};

std::vector<std::string> scenario_names();
// Throws InputError for an unknown name.
Scenario make_scenario(const std::string& name);

} // namespace coiso
