#pragma once

#include <string>
#include <vector>

#include "coiso/chart.hpp"
#include "coiso/multivector.hpp"
#include "coiso/scalar_fn.hpp"
#include "coiso/scenarios.hpp"

namespace coiso::testing {

// Standard pi on T*R^2 pushed forward by (x, p) -> (x1, x2 + p1^2, p1, p2):
//   pi = dx1^dp1 + 2*p1 dx1^dx2 + dx2^dp2.
// Poisson with P(pi) = 0 but not constant, so the Maurer-Cartan series has
// terms beyond the first.
inline ChartSpec bent_chart() {
  const auto vars = chart_vars({"x1", "x2"}, {"p1", "p2"});
  Multivector pi(vars, 2);
  pi.add_term({0, 2}, ScalarFn(vars, 1));
  pi.add_term({0, 1}, parse("2*p1", vars));
  pi.add_term({1, 3}, ScalarFn(vars, 1));
  return ChartSpec("bent", vars, pi, {Interval{}, Interval{}});
}

// 2 base + 2 fibre variables, the shape used for Schouten property checks.
inline VarSetPtr small_vars() { return chart_vars({"x1", "x2"}, {"p1", "p2"}); }

inline Section section_of(const ChartSpec& chart, const std::vector<std::string>& components) {
  Section s{chart.vars(), {}};
  for (const auto& c : components)
    s.components.push_back(chart.parse(c));
  return s;
}

inline Multivector mv(const VarSetPtr& vars, const std::string& coeff, const std::vector<std::string>& frame) {
  Frame f;
  for (const auto& name : frame)
    f.push_back(static_cast<std::uint32_t>(vars->index(name)));
  return Multivector::term(parse(coeff, vars), f);
}

inline std::vector<ChartSpec> builtin_charts() {
  std::vector<ChartSpec> out;
  for (const auto& name : scenario_names())
    out.push_back(make_scenario(name).chart);
  return out;
}

inline std::vector<ChartSpec> adapted_charts() { return {torus_chart(), hypersurface_chart()}; }

} // namespace coiso::testing
