#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "coiso/multivector.hpp"
#include "coiso/scalar_fn.hpp"

namespace coiso {

inline constexpr const char* kTimeVariable = "t";

struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
};

// Metadata of a chart adapted to the kernel foliation and a complement:
// kernel_vars[i] is conjugate to the i-th fibre variable, omega_C is the
// constant leafwise form on leaf_vars.
struct AdaptedMeta {
  std::vector<std::size_t> leaf_vars;
  std::vector<std::size_t> kernel_vars;
  RationalMatrix omega_C;
};

// Variable list of a chart: base variables, then fibre variables, then the
// time variable "t".
VarSetPtr chart_vars(const std::vector<std::string>& base, const std::vector<std::string>& fibre);

// Local model U in E -> C: base and fibre coordinates, the bivector Pi, a
// numeric box on the base and optional adapted-coordinate metadata.
class ChartSpec {
public:
  // Checks the structural invariants; throws InputError on violation.
  ChartSpec(std::string name, VarSetPtr vars, Multivector pi, std::vector<Interval> box,
            std::optional<AdaptedMeta> adapted = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  const VarSetPtr& vars() const noexcept { return vars_; }
  const Multivector& pi() const noexcept { return pi_; }
  const std::vector<Interval>& box() const noexcept { return box_; }
  const std::optional<AdaptedMeta>& adapted() const noexcept { return adapted_; }

  const std::vector<std::size_t>& base() const noexcept { return base_; }
  const std::vector<std::size_t>& fibre() const noexcept { return fibre_; }
  std::size_t time() const noexcept { return time_; }
  std::size_t base_dim() const noexcept { return base_.size(); }
  std::size_t fibre_dim() const noexcept { return fibre_.size(); }

  ScalarFn zero() const { return ScalarFn(vars_); }
  ScalarFn var(const std::string& name) const { return ScalarFn::variable(vars_, name); }
  ScalarFn parse(const std::string& text) const;

private:
  std::string name_;
  VarSetPtr vars_;
  Multivector pi_;
  std::vector<Interval> box_;
  std::optional<AdaptedMeta> adapted_;
  std::vector<std::size_t> base_, fibre_;
  std::size_t time_ = 0;
};

// Symbolic section C -> E: one function of the base variables per fibre
// variable.
struct Section {
  VarSetPtr vars;
  std::vector<ScalarFn> components;
};

// Throws InputError if a component uses fibre or time variables or the
// component count is wrong.
void validate_section(const ChartSpec& chart, const Section& s);
Section zero_section(const ChartSpec& chart);
Section scaled(const Section& s, const Rational& c);

// s seen as a fibrewise-constant vertical vector field sum_j s_j d/dp_j.
Multivector vertical_field(const ChartSpec& chart, const Section& s);

// X_H = [Pi, H].
Multivector hamiltonian_vf(const ChartSpec& chart, const ScalarFn& h);

} // namespace coiso
