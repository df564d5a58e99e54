#pragma once

#include <cstddef>
#include <cstdint>

#include "coiso/chart.hpp"
#include "coiso/flow.hpp"
#include "coiso/multivector.hpp"

namespace coiso {

// Bivector of sum_i dq_i^dp_i + omega_C rebuilt from the adapted metadata.
Multivector adapted_pi(const ChartSpec& chart);

struct AdaptedCheck {
  Multivector difference;  // chart.pi() - adapted_pi(chart)

  bool valid() const { return difference.is_zero(); }
};

// Throws InputError when the chart has no adapted metadata.
AdaptedCheck check_adapted(const ChartSpec& chart);

// Throws InputError listing the differing terms unless pi matches the
// metadata exactly.
void validate_adapted(const ChartSpec& chart);

// Constant bivector of omega_C on the leaf directions.
Multivector leaf_pi(const ChartSpec& chart);

// X^G_f: the leafwise Hamiltonian field of a base function (y directions,
// coefficients may involve q).
Multivector leafwise_hamiltonian(const ChartSpec& chart, const ScalarFn& f);

// {f, g}^G = X^G_g(f).
ScalarFn leafwise_poisson(const ChartSpec& chart, const ScalarFn& f, const ScalarFn& g);

// X_{pi^* f} - P(X_{pi^* f}) - X^G_f.
Multivector splitting_check(const ChartSpec& chart, const ScalarFn& f);

struct DglaReport {
  std::uint64_t seed = 0;
  unsigned samples = 0;
  std::size_t higher_checks = 0;   // lambda_3 and lambda_4 evaluations
  std::size_t bracket_checks = 0;  // lambda_2(f, g) + {f, g}^G
  std::size_t max_residual_terms = 0;

  bool ok() const { return max_residual_terms == 0; }
};

// lambda_3 and lambda_4 on random mixed arguments, and lambda_2(f, g) against
// the leafwise Poisson bracket on random base functions.
DglaReport dgla_residual(const ChartSpec& chart, unsigned samples, std::uint64_t seed);

// Section reached from the zero section by the flow of X_{pi^* f_t}, t in
// [0, 1]: for each node p the leafwise path sigma with sigma(1) = p is
// integrated backwards, then P(X_{pi^* f_t}) is accumulated along it.
SectionGrid transversal_flow_section(const ChartSpec& chart, const ScalarFn& f_t, const FlowConfig& cfg);

// Codimension one: s(p) = -int_0^1 (df_t/dq)(sigma(t)) dt, with sigma from
// RK4 and the integral by composite 4-point Gauss-Legendre on each step.
SectionGrid hypersurface_section(const ChartSpec& chart, const ScalarFn& f_t, const FlowConfig& cfg);

} // namespace coiso
