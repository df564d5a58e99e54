#include "coiso/transversal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "coiso/errors.hpp"
#include "coiso/linfty.hpp"
#include "coiso/sampling.hpp"

namespace coiso {

namespace {

const AdaptedMeta& require_adapted(const ChartSpec& chart) {
  if (!chart.adapted())
    throw InputError("chart '" + chart.name() + "' has no adapted metadata");
  return *chart.adapted();
}

// Escape limits of the base box inflated by 10% per side.
void check_inside(const ChartSpec& chart, const double* z, std::size_t node) {
  for (std::size_t a = 0; a < chart.base_dim(); ++a) {
    const auto& iv = chart.box()[a];
    const double v = z[chart.base()[a]];
    if (!(v >= iv.lo - 0.1 * iv.width() && v <= iv.hi + 0.1 * iv.width())) {
      std::ostringstream msg;
      msg << "leafwise path through node " << node << " left the chart box ("
          << (*chart.vars())[chart.base()[a]].name << " = " << v << ")";
      throw NumericAbort(msg.str());
    }
  }
}

void require_base_family(const ChartSpec& chart, const ScalarFn& f_t) {
  require_same_vars(chart.vars(), f_t.vars());
  if (f_t.depends_on_kind(VarKind::fibre))
    throw InputError("family must depend on base variables and t only");
}

} // namespace

Multivector adapted_pi(const ChartSpec& chart) {
  const auto& meta = require_adapted(chart);
  // Directions: leaf block, then (q_i, p_i) pairs.
  std::vector<std::size_t> dirs(meta.leaf_vars.begin(), meta.leaf_vars.end());
  const std::size_t l = dirs.size();
  for (std::size_t i = 0; i < meta.kernel_vars.size(); ++i) {
    dirs.push_back(meta.kernel_vars[i]);
    dirs.push_back(chart.fibre()[i]);
  }
  RationalMatrix m(dirs.size(), std::vector<Rational>(dirs.size(), Rational(0)));
  for (std::size_t a = 0; a < l; ++a)
    for (std::size_t b = 0; b < l; ++b)
      m[a][b] = meta.omega_C[a][b];
  for (std::size_t i = 0; i < meta.kernel_vars.size(); ++i) {
    m[l + 2 * i][l + 2 * i + 1] = 1;
    m[l + 2 * i + 1][l + 2 * i] = -1;
  }
  return invert_constant_symplectic(chart.vars(), dirs, m);
}

AdaptedCheck check_adapted(const ChartSpec& chart) {
  return AdaptedCheck{chart.pi() - adapted_pi(chart)};
}

void validate_adapted(const ChartSpec& chart) {
  const auto check = check_adapted(chart);
  if (!check.valid())
    throw InputError("pi does not match the adapted metadata; difference: " + check.difference.to_string());
}

Multivector leaf_pi(const ChartSpec& chart) {
  const auto& meta = require_adapted(chart);
  if (meta.leaf_vars.empty())
    return Multivector(chart.vars(), 2);
  return invert_constant_symplectic(chart.vars(), meta.leaf_vars, meta.omega_C);
}

Multivector leafwise_hamiltonian(const ChartSpec& chart, const ScalarFn& f) {
  require_same_vars(chart.vars(), f.vars());
  Multivector x = schouten(leaf_pi(chart), Multivector::scalar(f));
  if (x.is_zero())
    return Multivector(chart.vars(), 1);
  return x;
}

ScalarFn leafwise_poisson(const ChartSpec& chart, const ScalarFn& f, const ScalarFn& g) {
  const Multivector xg = leafwise_hamiltonian(chart, g);
  ScalarFn out(chart.vars());
  for (const auto& [frame, c] : xg.terms())
    out += c * f.derivative(frame[0]);
  return out;
}

Multivector splitting_check(const ChartSpec& chart, const ScalarFn& f) {
  require_adapted(chart);
  require_base_family(chart, f);
  const Multivector xf = hamiltonian_vf(chart, f);
  Multivector residual = xf - project_P(xf) - leafwise_hamiltonian(chart, f);
  if (residual.is_zero())
    return Multivector(chart.vars(), 1);
  return residual;
}

DglaReport dgla_residual(const ChartSpec& chart, unsigned samples, std::uint64_t seed) {
  require_adapted(chart);
  DglaReport report;
  report.seed = seed;
  report.samples = samples;
  Sampler sampler(seed);
  for (unsigned sample = 0; sample < samples; ++sample) {
    std::vector<Multivector> args;
    for (int i = 0; i < 4; ++i)
      args.push_back(sampler.abelian_element(chart, 2));
    for (std::size_t k = 3; k <= 4; ++k) {
      const Multivector value = lambda(chart, std::span<const Multivector>(args.data(), k));
      report.max_residual_terms = std::max(report.max_residual_terms, value.size());
      ++report.higher_checks;
    }
    const ScalarFn f = sampler.base_function(chart, 2);
    const ScalarFn g = sampler.base_function(chart, 2);
    const std::array<Multivector, 2> fg{Multivector::scalar(f), Multivector::scalar(g)};
    const Multivector l2 = lambda(chart, fg);
    const Multivector expected = Multivector::scalar(-leafwise_poisson(chart, f, g));
    report.max_residual_terms = std::max(report.max_residual_terms, (l2 - expected).size());
    ++report.bracket_checks;
  }
  return report;
}

SectionGrid transversal_flow_section(const ChartSpec& chart, const ScalarFn& f_t, const FlowConfig& cfg) {
  require_adapted(chart);
  require_base_family(chart, f_t);
  cfg.validate();
  const Grid grid = config_grid(chart, cfg);
  const std::size_t n = chart.vars()->size(), m = chart.fibre_dim(), d = chart.base_dim();
  const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1.0 / cfg.dt - 1e-9)));

  const Multivector xg = leafwise_hamiltonian(chart, f_t);
  std::vector<std::pair<std::size_t, ScalarFn>> leafwise;
  for (const auto& [frame, c] : xg.terms())
    leafwise.emplace_back(frame[0], c);
  auto with_accumulators = leafwise;
  const Multivector vertical = project_P(hamiltonian_vf(chart, f_t));
  for (std::size_t j = 0; j < m; ++j)
    with_accumulators.emplace_back(n + j, vertical.coefficient({static_cast<std::uint32_t>(chart.fibre()[j])}));

  const FieldSchedule backward(leafwise, chart.time(), 1, 0, steps);
  const FieldSchedule forward(with_accumulators, chart.time(), 0, 1, steps);

  SectionGrid out{grid, m, std::vector<double>(grid.node_count() * m)};
  std::vector<double> z(n + m), x(d);
  auto work = forward.make_workspace(z.size());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    grid.coords(node, x);
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t a = 0; a < d; ++a)
      z[chart.base()[a]] = x[a];
    for (std::size_t k = 0; k < steps; ++k) {
      backward.rk4_step(k, z, work);
      check_inside(chart, z.data(), node);
    }
    for (std::size_t k = 0; k < steps; ++k) {
      forward.rk4_step(k, z, work);
      check_inside(chart, z.data(), node);
    }
    for (std::size_t j = 0; j < m; ++j)
      out.values[node * m + j] = z[n + j];
  }
  return out;
}

SectionGrid hypersurface_section(const ChartSpec& chart, const ScalarFn& f_t, const FlowConfig& cfg) {
  const auto& meta = require_adapted(chart);
  if (chart.fibre_dim() != 1)
    throw InputError("hypersurface_section needs a single fibre variable");
  require_base_family(chart, f_t);
  cfg.validate();
  const Grid grid = config_grid(chart, cfg);
  const std::size_t n = chart.vars()->size(), d = chart.base_dim(), tv = chart.time();
  const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1.0 / cfg.dt - 1e-9)));
  const double h = 1.0 / static_cast<double>(steps);

  // Leafwise field and integrand with t kept as a state coordinate.
  const Multivector xg = leafwise_hamiltonian(chart, f_t);
  std::vector<std::pair<std::size_t, CompiledPoly>> field;
  for (const auto& [frame, c] : xg.terms())
    field.emplace_back(frame[0], CompiledPoly(c));
  const CompiledPoly integrand(f_t.derivative(meta.kernel_vars[0]));

  auto velocity = [&](std::vector<double>& z, double t, std::vector<double>& v) {
    z[tv] = t;
    std::fill(v.begin(), v.end(), 0.0);
    for (const auto& [slot, c] : field)
      v[slot] = c(z.data());
  };
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto rk4 = [&](std::vector<double>& z, double t, double dt) {
    velocity(z, t, k1);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = z[i] + 0.5 * dt * k1[i];
    velocity(tmp, t + 0.5 * dt, k2);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = z[i] + 0.5 * dt * k2[i];
    velocity(tmp, t + 0.5 * dt, k3);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = z[i] + dt * k3[i];
    velocity(tmp, t + dt, k4);
    for (std::size_t i = 0; i < n; ++i)
      z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  };

  // Gauss-Legendre nodes and weights on [0, 1].
  const double r1 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double r2 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double w1 = (18.0 + std::sqrt(30.0)) / 36.0, w2 = (18.0 - std::sqrt(30.0)) / 36.0;
  const std::array<double, 4> gl_x{0.5 * (1 - r2), 0.5 * (1 - r1), 0.5 * (1 + r1), 0.5 * (1 + r2)};
  const std::array<double, 4> gl_w{0.5 * w2, 0.5 * w1, 0.5 * w1, 0.5 * w2};

  SectionGrid out{grid, 1, std::vector<double>(grid.node_count())};
  std::vector<double> z(n), x(d), z0(n), v0(n), v1(n), zq(n);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    grid.coords(node, x);
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t a = 0; a < d; ++a)
      z[chart.base()[a]] = x[a];
    for (std::size_t k = steps; k-- > 0;) {
      rk4(z, static_cast<double>(k + 1) * h, -h);
      check_inside(chart, z.data(), node);
    }
    double integral = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double t0 = static_cast<double>(k) * h;
      z0 = z;
      velocity(z0, t0, v0);
      rk4(z, t0, h);
      check_inside(chart, z.data(), node);
      velocity(z, t0 + h, v1);
      // Cubic Hermite interpolation of the path inside the step.
      for (std::size_t g = 0; g < 4; ++g) {
        const double s = gl_x[g];
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        for (std::size_t i = 0; i < n; ++i)
          zq[i] = h00 * z0[i] + h10 * h * v0[i] + h01 * z[i] + h11 * h * v1[i];
        zq[tv] = t0 + s * h;
        integral += gl_w[g] * h * integrand(zq.data());
      }
    }
    out.values[node] = -integral;
  }
  return out;
}

} // namespace coiso
