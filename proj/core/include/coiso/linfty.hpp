#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coiso/chart.hpp"
#include "coiso/multivector.hpp"

namespace coiso {

struct ChartValidation {
  Multivector poisson_residual;     // [Pi, Pi]
  Multivector projection_residual;  // P(Pi)

  bool valid() const { return poisson_residual.is_zero() && projection_residual.is_zero(); }
};

ChartValidation validate_chart(const ChartSpec& chart);

// P((psi_{-s})_* Pi): zero iff the graph of s is coisotropic.
Multivector mu(const ChartSpec& chart, const Section& s);

// Members of the abelian subalgebra Gamma(wedge E): fibre directions only,
// coefficients in the base variables only.
bool in_abelian_subalgebra(const ChartSpec& chart, const Multivector& a);

// Degree in Gamma(wedge E)[1]; functions sit in degree -1.
inline int shifted_degree(const Multivector& a) { return static_cast<int>(a.degree()) - 1; }

// Derived bracket lambda_k(a_1, ..., a_k) = P([...[[Pi, a_1], a_2]..., a_k]).
// Throws InputError if an argument is outside the abelian subalgebra.
Multivector lambda(const ChartSpec& chart, std::span<const Multivector> args);

struct MCReport {
  Multivector residual;         // MC(-s)
  Multivector oracle_residual;  // mu(s)
  unsigned order_terminated = 0;
  unsigned order_bound = 0;
  bool terminated = false;
  bool is_zero = false;
  bool oracle_agrees = false;
};

// fibre-degree(Pi) + |fibre| + 2.
unsigned mc_order_bound(const ChartSpec& chart);

// Sums MC(-s) = sum_k (1/k!) lambda_k(-s, ..., -s). The series is declared
// terminated at the first k whose unprojected iterated bracket vanishes (all
// later terms then vanish as well); otherwise it stops at max_order with
// terminated = false.
MCReport mc_series(const ChartSpec& chart, const Section& s, unsigned max_order = 32);

struct ConormalEntry {
  std::size_t j = 0;
  std::size_t k = 0;
  ScalarFn value;
};

struct CoisotropyCertificate {
  bool coisotropic = false;
  // Nonzero Pi(eta_j, eta_k) restricted to the graph, j < k.
  std::vector<ConormalEntry> nonzero;
};

// Conormal test: eta_j = dp_j - sum_i (ds_j/dx_i) dx_i annihilate the
// tangent space of graph(s); the graph is coisotropic iff Pi(eta_j, eta_k)
// vanishes on it.
CoisotropyCertificate is_coisotropic(const ChartSpec& chart, const Section& s);

// d/de at e = 0 of mu(e*s), by formal expansion.
Multivector linearized_mc(const ChartSpec& chart, const Section& s);

// Sum over unshuffles of lambda_{n-i+1}(lambda_i(...), ...) with Koszul signs.
Multivector jacobiator(const ChartSpec& chart, std::span<const Multivector> args);

struct JacobiReport {
  std::uint64_t seed = 0;
  unsigned arity = 0;
  unsigned samples = 0;
  std::size_t symmetry_checks = 0;
  std::size_t identity_checks = 0;
  std::size_t max_residual_terms = 0;

  bool ok() const { return max_residual_terms == 0; }
};

// Graded symmetry of lambda_k and the generalized Jacobi identities up to
// `arity` (<= 4) on random abelian-subalgebra arguments.
JacobiReport jacobi_suite(const ChartSpec& chart, unsigned arity, unsigned samples, std::uint64_t seed);

// [Pi, X] == 0.
bool centralizer_check(const ChartSpec& chart, const Multivector& x);

} // namespace coiso
