#include "coiso/linfty.hpp"

#include <algorithm>

#include "coiso/errors.hpp"
#include "coiso/sampling.hpp"

namespace coiso {

ChartValidation validate_chart(const ChartSpec& chart) {
  return ChartValidation{schouten(chart.pi(), chart.pi()), project_P(chart.pi())};
}

namespace {

// No section validation, so formal parameters (the time variable) may appear.
Multivector mu_unchecked(const ChartSpec& chart, const Section& s) {
  return project_P(pushforward_translate(chart.pi(), s.components, -1));
}

} // namespace

Multivector mu(const ChartSpec& chart, const Section& s) {
  validate_section(chart, s);
  return mu_unchecked(chart, s);
}

bool in_abelian_subalgebra(const ChartSpec& chart, const Multivector& a) {
  if (!same_vars(chart.vars(), a.vars()))
    return false;
  const auto& vars = *chart.vars();
  for (const auto& [frame, c] : a.terms()) {
    for (auto d : frame)
      if (vars[d].kind != VarKind::fibre)
        return false;
    if (c.depends_on_kind(VarKind::fibre) || c.depends_on_kind(VarKind::time))
      return false;
  }
  return true;
}

Multivector lambda(const ChartSpec& chart, std::span<const Multivector> args) {
  if (args.empty())
    throw InputError("lambda needs at least one argument");
  Multivector acc = chart.pi();
  for (const auto& a : args) {
    if (!in_abelian_subalgebra(chart, a))
      throw InputError("lambda argument is not in the abelian subalgebra Gamma(wedge E)");
    acc = schouten(acc, a);
  }
  return project_P(acc);
}

unsigned mc_order_bound(const ChartSpec& chart) {
  return chart.pi().fibre_degree() + static_cast<unsigned>(chart.fibre_dim()) + 2;
}

MCReport mc_series(const ChartSpec& chart, const Section& s, unsigned max_order) {
  validate_section(chart, s);
  MCReport report{Multivector(chart.vars(), 2), Multivector(chart.vars(), 2)};
  report.order_bound = mc_order_bound(chart);

  const Multivector minus_s = vertical_field(chart, scaled(s, -1));
  Multivector iterated = chart.pi();
  Rational inv_factorial = 1;
  for (unsigned k = 1; k <= max_order; ++k) {
    iterated = schouten(iterated, minus_s);
    inv_factorial /= k;
    report.order_terminated = k;
    if (iterated.is_zero()) {
      report.terminated = true;
      break;
    }
    report.residual += project_P(iterated) * inv_factorial;
  }
  report.is_zero = report.residual.is_zero();
  report.oracle_residual = mu(chart, s);
  report.oracle_agrees = report.residual == report.oracle_residual;
  return report;
}

CoisotropyCertificate is_coisotropic(const ChartSpec& chart, const Section& s) {
  validate_section(chart, s);
  const auto& vars = chart.vars();
  const std::size_t n = vars->size();
  const std::size_t m = chart.fibre_dim();

  // Dense conormal covectors eta_j.
  std::vector<std::vector<ScalarFn>> eta(m, std::vector<ScalarFn>(n, ScalarFn(vars)));
  for (std::size_t j = 0; j < m; ++j) {
    eta[j][chart.fibre()[j]] = ScalarFn(vars, 1);
    for (auto i : chart.base())
      eta[j][i] = -s.components[j].derivative(i);
  }

  std::vector<std::pair<std::size_t, ScalarFn>> on_graph;
  for (std::size_t j = 0; j < m; ++j)
    on_graph.emplace_back(chart.fibre()[j], s.components[j]);

  CoisotropyCertificate cert;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = j + 1; k < m; ++k) {
      ScalarFn g(vars);
      for (const auto& [frame, c] : chart.pi().terms()) {
        const auto a = frame[0], b = frame[1];
        g += c * (eta[j][a] * eta[k][b] - eta[j][b] * eta[k][a]);
      }
      g = g.substitute(on_graph);
      if (!g.is_zero())
        cert.nonzero.push_back({j, k, std::move(g)});
    }
  }
  cert.coisotropic = cert.nonzero.empty();
  return cert;
}

Multivector linearized_mc(const ChartSpec& chart, const Section& s) {
  validate_section(chart, s);
  // The time variable plays the formal parameter e.
  const ScalarFn eps = ScalarFn::variable(chart.vars(), chart.time());
  Section scaled_s = s;
  for (auto& c : scaled_s.components)
    c *= eps;
  const Multivector full = mu_unchecked(chart, scaled_s);
  const std::size_t t = chart.time();
  return full.map_coefficients([t](const ScalarFn& c) { return c.derivative(t).substitute(t, Rational(0)); });
}

Multivector jacobiator(const ChartSpec& chart, std::span<const Multivector> args) {
  const std::size_t n = args.size();
  if (n == 0 || n > 16)
    throw InputError("jacobiator arity out of range");
  int total_shifted = 0;
  for (const auto& a : args)
    total_shifted += shifted_degree(a);
  // Result has shifted degree total + 2, i.e. multivector degree total + 3.
  Multivector sum(chart.vars(), static_cast<unsigned>(std::max(0, total_shifted + 3)));

  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<Multivector> inner, outer;
    std::vector<std::size_t> chosen, rest;
    for (std::size_t i = 0; i < n; ++i)
      ((mask >> i) & 1u ? chosen : rest).push_back(i);
    int sign = 1;
    for (auto r : rest)
      for (auto c : chosen)
        if (r < c && (shifted_degree(args[r]) * shifted_degree(args[c])) % 2 != 0)
          sign = -sign;
    for (auto c : chosen)
      inner.push_back(args[c]);
    outer.push_back(lambda(chart, inner));
    for (auto r : rest)
      outer.push_back(args[r]);
    Multivector term = lambda(chart, outer);
    if (sign < 0)
      term = -term;
    sum += term;
  }
  return sum;
}

JacobiReport jacobi_suite(const ChartSpec& chart, unsigned arity, unsigned samples, std::uint64_t seed) {
  if (arity == 0 || arity > 4)
    throw InputError("jacobi_suite arity must be in 1..4");
  JacobiReport report;
  report.seed = seed;
  report.arity = arity;
  report.samples = samples;
  Sampler sampler(seed);

  for (unsigned sample = 0; sample < samples; ++sample) {
    std::vector<Multivector> args;
    for (unsigned i = 0; i < arity; ++i)
      args.push_back(sampler.abelian_element(chart, 2));

    for (unsigned n = 1; n <= arity; ++n) {
      const std::span<const Multivector> prefix(args.data(), n);
      report.max_residual_terms = std::max(report.max_residual_terms, jacobiator(chart, prefix).size());
      ++report.identity_checks;

      // Adjacent transpositions: lambda(.., a, b, ..) = (-1)^{|a||b|} lambda(.., b, a, ..).
      const Multivector reference = lambda(chart, prefix);
      for (unsigned i = 0; i + 1 < n; ++i) {
        std::vector<Multivector> swapped(prefix.begin(), prefix.end());
        std::swap(swapped[i], swapped[i + 1]);
        Multivector other = lambda(chart, swapped);
        if ((shifted_degree(args[i]) * shifted_degree(args[i + 1])) % 2 != 0)
          other = -other;
        report.max_residual_terms = std::max(report.max_residual_terms, (reference - other).size());
        ++report.symmetry_checks;
      }
    }
  }
  return report;
}

bool centralizer_check(const ChartSpec& chart, const Multivector& x) {
  if (x.degree() != 1 && !x.is_zero())
    throw InputError("centralizer_check expects a vector field");
  return schouten(chart.pi(), x).is_zero();
}

} // namespace coiso
