#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "coiso/chart.hpp"
#include "coiso/multivector.hpp"

namespace coiso {

// Seeded generator of random exact objects. Only the raw 64-bit engine output
// is used, so sequences do not depend on the standard library's distributions.
class Sampler {
public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  // Numerator in [-3, 3], denominator in {1, 2, 3}.
  Rational small_rational();
  Rational nonzero_rational();

  // Random polynomial in the given variables, total degree <= max_degree,
  // at most max_terms terms.
  ScalarFn polynomial(const VarSetPtr& vars, std::span<const std::size_t> in_vars, unsigned max_degree,
                      unsigned max_terms = 4);

  // Random degree-k multivector on `directions` with coefficients in `coeff_vars`.
  Multivector multivector(const VarSetPtr& vars, std::span<const std::size_t> directions, unsigned degree,
                          std::span<const std::size_t> coeff_vars, unsigned max_poly_degree,
                          unsigned max_frames = 3);

  Section section(const ChartSpec& chart, unsigned max_degree);
  // A base function or a fibre-direction multivector with base coefficients.
  Multivector abelian_element(const ChartSpec& chart, unsigned max_degree);
  ScalarFn base_function(const ChartSpec& chart, unsigned max_degree);

private:
  std::mt19937_64 engine_;
};

} // namespace coiso
