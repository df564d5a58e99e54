#include "coiso/sampling.hpp"

#include <algorithm>

namespace coiso {

Rational Sampler::small_rational() {
  const long num = static_cast<long>(below(7)) - 3;
  const long den = static_cast<long>(below(3)) + 1;
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational Sampler::nonzero_rational() {
  Rational q;
  do {
    q = small_rational();
  } while (q == 0);
  return q;
}

ScalarFn Sampler::polynomial(const VarSetPtr& vars, std::span<const std::size_t> in_vars, unsigned max_degree,
                             unsigned max_terms) {
  ScalarFn f(vars);
  const unsigned terms = static_cast<unsigned>(below(max_terms + 1));
  for (unsigned t = 0; t < terms; ++t) {
    Exponents e(vars->size(), 0);
    const unsigned degree = static_cast<unsigned>(below(max_degree + 1));
    for (unsigned d = 0; d < degree && !in_vars.empty(); ++d)
      ++e[in_vars[below(in_vars.size())]];
    f += ScalarFn::monomial(vars, std::move(e), nonzero_rational());
  }
  return f;
}

Multivector Sampler::multivector(const VarSetPtr& vars, std::span<const std::size_t> directions, unsigned degree,
                                 std::span<const std::size_t> coeff_vars, unsigned max_poly_degree,
                                 unsigned max_frames) {
  Multivector m(vars, degree);
  if (degree > directions.size())
    return m;
  const unsigned frames = 1 + static_cast<unsigned>(below(max_frames));
  for (unsigned f = 0; f < frames; ++f) {
    // Random degree-subset of the directions.
    std::vector<std::size_t> pool(directions.begin(), directions.end());
    Frame frame;
    for (unsigned k = 0; k < degree; ++k) {
      const auto pick = below(pool.size());
      frame.push_back(static_cast<std::uint32_t>(pool[pick]));
      pool.erase(pool.begin() + static_cast<long>(pick));
    }
    std::sort(frame.begin(), frame.end());
    m.add_term(frame, polynomial(vars, coeff_vars, max_poly_degree, 3));
  }
  return m;
}

Section Sampler::section(const ChartSpec& chart, unsigned max_degree) {
  Section s{chart.vars(), {}};
  for (std::size_t j = 0; j < chart.fibre_dim(); ++j)
    s.components.push_back(polynomial(chart.vars(), chart.base(), max_degree, 4));
  return s;
}

ScalarFn Sampler::base_function(const ChartSpec& chart, unsigned max_degree) {
  return polynomial(chart.vars(), chart.base(), max_degree, 4);
}

Multivector Sampler::abelian_element(const ChartSpec& chart, unsigned max_degree) {
  const auto degree = static_cast<unsigned>(below(chart.fibre_dim() + 1));
  if (degree == 0)
    return Multivector::scalar(base_function(chart, max_degree));
  return multivector(chart.vars(), chart.fibre(), degree, chart.base(), max_degree, 2);
}

} // namespace coiso
