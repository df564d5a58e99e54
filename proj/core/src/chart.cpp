#include "coiso/chart.hpp"

#include <algorithm>

#include "coiso/errors.hpp"

namespace coiso {

VarSetPtr chart_vars(const std::vector<std::string>& base, const std::vector<std::string>& fibre) {
  std::vector<Variable> vars;
  for (const auto& b : base)
    vars.push_back({b, VarKind::base});
  for (const auto& f : fibre)
    vars.push_back({f, VarKind::fibre});
  vars.push_back({kTimeVariable, VarKind::time});
  return make_varset(std::move(vars));
}

ChartSpec::ChartSpec(std::string name, VarSetPtr vars, Multivector pi, std::vector<Interval> box,
                     std::optional<AdaptedMeta> adapted)
    : name_(std::move(name)), vars_(std::move(vars)), pi_(std::move(pi)), box_(std::move(box)),
      adapted_(std::move(adapted)) {
  base_ = vars_->indices_of(VarKind::base);
  fibre_ = vars_->indices_of(VarKind::fibre);
  const auto times = vars_->indices_of(VarKind::time);
  if (times.size() != 1)
    throw InputError("chart must declare exactly one time variable");
  time_ = times.front();
  if (base_.empty())
    throw InputError("chart needs at least one base variable");
  if (fibre_.empty())
    throw InputError("chart needs at least one fibre variable");
  require_same_vars(vars_, pi_.vars());
  if (pi_.degree() != 2 && !pi_.is_zero())
    throw InputError("pi must be a bivector");
  for (const auto& [f, c] : pi_.terms())
    if (c.depends_on(time_))
      throw InputError("pi must not depend on time");
  if (box_.size() != base_.size())
    throw InputError("box must give one interval per base variable");
  for (const auto& iv : box_)
    if (!(iv.lo < iv.hi))
      throw InputError("box interval must satisfy lo < hi");

  if (adapted_) {
    const auto& a = *adapted_;
    std::vector<std::size_t> all = a.leaf_vars;
    all.insert(all.end(), a.kernel_vars.begin(), a.kernel_vars.end());
    std::sort(all.begin(), all.end());
    if (all != base_)
      throw InputError("leaf_vars and kernel_vars must partition the base variables");
    if (a.kernel_vars.size() != fibre_.size())
      throw InputError("kernel_vars must have one entry per fibre variable");
    if (a.omega_C.size() != a.leaf_vars.size())
      throw InputError("omega_C size must match leaf_vars");
    for (std::size_t i = 0; i < a.omega_C.size(); ++i) {
      if (a.omega_C[i].size() != a.leaf_vars.size())
        throw InputError("omega_C must be square");
      for (std::size_t j = 0; j < a.omega_C.size(); ++j)
        if (a.omega_C[i][j] != -a.omega_C[j][i])
          throw InputError("omega_C must be antisymmetric");
    }
    // Throws on a singular block.
    (void)invert_matrix(a.omega_C);
  }
}

ScalarFn ChartSpec::parse(const std::string& text) const { return coiso::parse(text, vars_); }

void validate_section(const ChartSpec& chart, const Section& s) {
  if (s.components.size() != chart.fibre_dim())
    throw InputError("section must have one component per fibre variable");
  for (const auto& c : s.components) {
    require_same_vars(chart.vars(), c.vars());
    if (c.depends_on_kind(VarKind::fibre) || c.depends_on_kind(VarKind::time))
      throw InputError("section components must depend on base variables only");
  }
}

Section zero_section(const ChartSpec& chart) {
  return Section{chart.vars(), std::vector<ScalarFn>(chart.fibre_dim(), chart.zero())};
}

Section scaled(const Section& s, const Rational& c) {
  Section out = s;
  for (auto& comp : out.components)
    comp *= c;
  return out;
}

Multivector vertical_field(const ChartSpec& chart, const Section& s) {
  Multivector x(chart.vars(), 1);
  for (std::size_t j = 0; j < s.components.size(); ++j)
    x.add_term({static_cast<std::uint32_t>(chart.fibre()[j])}, s.components[j]);
  return x;
}

Multivector hamiltonian_vf(const ChartSpec& chart, const ScalarFn& h) {
  return schouten(chart.pi(), Multivector::scalar(h));
}

} // namespace coiso
