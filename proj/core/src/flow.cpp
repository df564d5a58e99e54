#include "coiso/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "coiso/errors.hpp"
#include "coiso/linfty.hpp"

namespace coiso {

// --- Grid -------------------------------------------------------------------

std::size_t Grid::node_count() const {
  std::size_t n = 1;
  for (auto k : nodes)
    n *= k;
  return n;
}

double Grid::spacing(std::size_t axis) const {
  return box[axis].width() / static_cast<double>(nodes[axis] - 1);
}

void Grid::coords(std::size_t node, std::span<double> out) const {
  for (std::size_t a = dim(); a-- > 0;) {
    const std::size_t i = node % nodes[a];
    node /= nodes[a];
    out[a] = (i + 1 == nodes[a]) ? box[a].hi : box[a].lo + static_cast<double>(i) * spacing(a);
  }
}

bool Grid::operator==(const Grid& other) const {
  if (nodes != other.nodes || box.size() != other.box.size())
    return false;
  for (std::size_t a = 0; a < box.size(); ++a)
    if (box[a].lo != other.box[a].lo || box[a].hi != other.box[a].hi)
      return false;
  return true;
}

Grid make_grid(std::vector<Interval> box, std::vector<std::size_t> nodes) {
  if (box.size() != nodes.size())
    throw InputError("grid needs one node count per box axis");
  for (auto n : nodes)
    if (n < 3)
      throw InputError("grid needs at least 3 nodes per axis");
  for (const auto& iv : box)
    if (!(iv.lo < iv.hi))
      throw InputError("grid box interval must satisfy lo < hi");
  return Grid{std::move(box), std::move(nodes)};
}

std::vector<std::size_t> default_grid_nodes(std::size_t base_dim) {
  std::vector<std::size_t> nodes(base_dim, 5);
  for (std::size_t a = 0; a < std::min<std::size_t>(2, base_dim); ++a)
    nodes[a] = 65;
  return nodes;
}

SectionGrid sample_section(const ChartSpec& chart, const Section& s, const Grid& grid) {
  validate_section(chart, s);
  if (grid.dim() != chart.base_dim())
    throw InputError("grid dimension does not match the chart base");
  std::vector<CompiledPoly> comps;
  for (const auto& c : s.components)
    comps.emplace_back(c);
  SectionGrid out{grid, chart.fibre_dim(), std::vector<double>(grid.node_count() * chart.fibre_dim())};
  std::vector<double> z(chart.vars()->size(), 0.0), x(grid.dim());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    grid.coords(node, x);
    for (std::size_t a = 0; a < grid.dim(); ++a)
      z[chart.base()[a]] = x[a];
    for (std::size_t j = 0; j < comps.size(); ++j)
      out.values[node * out.fibre_dim + j] = comps[j](z);
  }
  return out;
}

SectionGrid constant_section(const Grid& grid, std::span<const double> value) {
  SectionGrid out{grid, value.size(), {}};
  out.values.reserve(grid.node_count() * value.size());
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    out.values.insert(out.values.end(), value.begin(), value.end());
  return out;
}

// --- Config -----------------------------------------------------------------

void FlowConfig::validate() const {
  if (!(dt > 0.0) || !(t1 > 0.0) || dt > t1)
    throw InputError("flow config requires 0 < dt <= t1");
  if (oversample < 1)
    throw InputError("flow config requires oversample >= 1");
  if (!(tol_graph > 0.0))
    throw InputError("flow config requires tol_graph > 0");
}

std::size_t FlowConfig::steps() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t1 / dt - 1e-9)));
}

Grid config_grid(const ChartSpec& chart, const FlowConfig& cfg) {
  auto nodes = cfg.grid.empty() ? default_grid_nodes(chart.base_dim()) : cfg.grid;
  return make_grid(chart.box(), std::move(nodes));
}

Rational to_rational(double x) {
  if (!std::isfinite(x))
    throw InputError("non-finite time value");
  return Rational(x);
}

// --- FieldSchedule ----------------------------------------------------------

FieldSchedule::FieldSchedule(std::vector<std::pair<std::size_t, ScalarFn>> components, std::size_t time_var,
                             const Rational& t_start, const Rational& t_end, std::size_t steps)
    : steps_(steps) {
  if (steps == 0)
    throw InputError("schedule needs at least one step");
  const Rational h = (t_end - t_start) / Rational(static_cast<long>(steps));
  h_ = h.get_d();
  bool autonomous = true;
  for (const auto& [slot, f] : components) {
    slots_.push_back(slot);
    if (f.depends_on(time_var))
      autonomous = false;
  }
  const std::size_t stage_count = autonomous ? 1 : 2 * steps + 1;
  stages_.reserve(stage_count);
  for (std::size_t j = 0; j < stage_count; ++j) {
    // Stage times are exact rationals t_start + j*h/2.
    const Rational t = t_start + h * Rational(static_cast<long>(j), 2);
    std::vector<CompiledPoly> stage;
    for (const auto& [slot, f] : components)
      stage.emplace_back(autonomous ? f : f.substitute(time_var, t));
    stages_.push_back(std::move(stage));
  }
}

const std::vector<CompiledPoly>& FieldSchedule::stage(std::size_t half_step) const {
  return stages_.size() == 1 ? stages_.front() : stages_[half_step];
}

void FieldSchedule::eval(std::size_t half_step, const double* z, double* dz) const {
  const auto& polys = stage(half_step);
  for (std::size_t c = 0; c < slots_.size(); ++c)
    dz[slots_[c]] = polys[c](z);
}

void FieldSchedule::rk4_step(std::size_t k, std::span<double> z, std::vector<double>& work) const {
  const std::size_t n = z.size();
  if (work.size() < 4 * n)
    work.assign(4 * n, 0.0);
  double* tmp = work.data();
  double* k1 = tmp + n;
  double* k2 = k1 + n;
  double* k3 = k2 + n;
  const auto& s1 = stage(2 * k);
  const auto& s2 = stage(2 * k + 1);
  const auto& s3 = stage(2 * k + 2);
  const std::size_t m = slots_.size();
  const double h = h_;

  std::copy(z.begin(), z.end(), tmp);
  for (std::size_t c = 0; c < m; ++c)
    k1[c] = s1[c](z.data());
  for (std::size_t c = 0; c < m; ++c)
    tmp[slots_[c]] = z[slots_[c]] + 0.5 * h * k1[c];
  for (std::size_t c = 0; c < m; ++c)
    k2[c] = s2[c](tmp);
  for (std::size_t c = 0; c < m; ++c)
    tmp[slots_[c]] = z[slots_[c]] + 0.5 * h * k2[c];
  for (std::size_t c = 0; c < m; ++c)
    k3[c] = s2[c](tmp);
  for (std::size_t c = 0; c < m; ++c)
    tmp[slots_[c]] = z[slots_[c]] + h * k3[c];
  for (std::size_t c = 0; c < m; ++c) {
    const double k4 = s3[c](tmp);
    z[slots_[c]] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4);
  }
}

void FieldSchedule::rk4_step_block(std::size_t k, std::span<double> z, std::size_t count,
                                   std::vector<double>& work) const {
  const std::size_t n = z.size() / count;
  const std::size_t m = slots_.size();
  const std::size_t need = n * count + 4 * m * count + count;
  if (work.size() < need)
    work.resize(need);
  double* tmp = work.data();
  double* k1 = tmp + n * count;
  double* k2 = k1 + m * count;
  double* k3 = k2 + m * count;
  double* k4 = k3 + m * count;
  double* scratch = k4 + m * count;
  const auto& s1 = stage(2 * k);
  const auto& s2 = stage(2 * k + 1);
  const auto& s3 = stage(2 * k + 2);
  const double h = h_;

  auto advance = [&](const double* slope, double factor) {
    for (std::size_t c = 0; c < m; ++c) {
      const double* z_col = z.data() + slots_[c] * count;
      double* t_col = tmp + slots_[c] * count;
      const double* sl = slope + c * count;
      for (std::size_t i = 0; i < count; ++i)
        t_col[i] = z_col[i] + factor * sl[i];
    }
  };

  std::copy(z.begin(), z.end(), tmp);
  for (std::size_t c = 0; c < m; ++c)
    s1[c].eval_block(z.data(), count, k1 + c * count, scratch);
  advance(k1, 0.5 * h);
  for (std::size_t c = 0; c < m; ++c)
    s2[c].eval_block(tmp, count, k2 + c * count, scratch);
  advance(k2, 0.5 * h);
  for (std::size_t c = 0; c < m; ++c)
    s2[c].eval_block(tmp, count, k3 + c * count, scratch);
  advance(k3, h);
  for (std::size_t c = 0; c < m; ++c)
    s3[c].eval_block(tmp, count, k4 + c * count, scratch);
  for (std::size_t c = 0; c < m; ++c) {
    double* z_col = z.data() + slots_[c] * count;
    const double *a = k1 + c * count, *b = k2 + c * count, *d = k3 + c * count, *e = k4 + c * count;
    for (std::size_t i = 0; i < count; ++i)
      z_col[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * d[i] + e[i]);
  }
}

namespace {

std::vector<std::pair<std::size_t, ScalarFn>> field_components(const ChartSpec& chart, const Multivector& x) {
  require_same_vars(chart.vars(), x.vars());
  if (x.degree() != 1 && !x.is_zero())
    throw InputError("generator must be a vector field");
  std::vector<std::pair<std::size_t, ScalarFn>> out;
  for (const auto& [frame, c] : x.terms())
    out.emplace_back(frame[0], c);
  return out;
}

struct InflatedBox {
  std::vector<double> lo, hi;

  explicit InflatedBox(const std::vector<Interval>& box) {
    for (const auto& iv : box) {
      lo.push_back(iv.lo - 0.1 * iv.width());
      hi.push_back(iv.hi + 0.1 * iv.width());
    }
  }
};

double blowup_bound(const ChartSpec& chart) {
  double scale = 1.0;
  for (const auto& iv : chart.box())
    scale = std::max({scale, std::abs(iv.lo), std::abs(iv.hi)});
  return 1e3 * scale;
}

template <typename Seed>
PointCloud flow_graph_impl(const ChartSpec& chart, const Grid& grid, Seed&& seed, const Multivector& generator,
                           const FlowConfig& cfg) {
  cfg.validate();
  const std::size_t steps = cfg.steps();
  const FieldSchedule schedule(field_components(chart, generator), chart.time(), 0, to_rational(cfg.t1), steps);

  std::vector<std::size_t> fine_nodes;
  for (auto n : grid.nodes)
    fine_nodes.push_back((n - 1) * cfg.oversample + 1);
  const Grid fine{grid.box, fine_nodes};

  const std::size_t d = chart.base_dim(), m = chart.fibre_dim();
  const InflatedBox limits(chart.box());
  const double bound = blowup_bound(chart);

  PointCloud cloud{d, m, std::vector<double>(fine.node_count() * (d + m))};
  const std::size_t nvars = chart.vars()->size();
  constexpr std::size_t kBlock = 256;
  std::vector<double> z, x(d), p(m), work;

  for (std::size_t first = 0; first < fine.node_count(); first += kBlock) {
    const std::size_t count = std::min(kBlock, fine.node_count() - first);
    z.assign(nvars * count, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
      fine.coords(first + i, x);
      seed(x, p);
      for (std::size_t a = 0; a < d; ++a)
        z[chart.base()[a] * count + i] = x[a];
      for (std::size_t j = 0; j < m; ++j)
        z[chart.fibre()[j] * count + i] = p[j];
    }

    for (std::size_t k = 0; k < steps; ++k) {
      schedule.rk4_step_block(k, z, count, work);
      for (std::size_t a = 0; a < d; ++a) {
        const double* col = z.data() + chart.base()[a] * count;
        bool inside = true;
        for (std::size_t i = 0; i < count; ++i)
          inside &= col[i] >= limits.lo[a] && col[i] <= limits.hi[a];
        if (inside)
          continue;
        for (std::size_t i = 0; i < count; ++i) {
          if (col[i] >= limits.lo[a] && col[i] <= limits.hi[a])
            continue;
          std::ostringstream msg;
          msg << "trajectory from seed point " << first + i << " left the chart box ("
              << (*chart.vars())[chart.base()[a]].name << " = " << col[i] << " at t = "
              << static_cast<double>(k + 1) * schedule.step() << ")";
          throw NumericAbort(msg.str());
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        const double* col = z.data() + chart.fibre()[j] * count;
        bool finite = true;
        for (std::size_t i = 0; i < count; ++i)
          finite &= std::abs(col[i]) <= bound;
        if (!finite)
          throw NumericAbort("trajectory fibre coordinate blew up");
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      double* out = cloud.points.data() + (first + i) * (d + m);
      for (std::size_t a = 0; a < d; ++a)
        out[a] = z[chart.base()[a] * count + i];
      for (std::size_t j = 0; j < m; ++j)
        out[d + j] = z[chart.fibre()[j] * count + i];
    }
  }
  return cloud;
}

// Multilinear interpolation inside the grid (clamped at the boundary).
void interpolate(const SectionGrid& s, std::span<const double> x, std::span<double> out) {
  const Grid& g = s.grid;
  const std::size_t d = g.dim();
  std::vector<std::size_t> lo(d);
  std::vector<double> frac(d);
  for (std::size_t a = 0; a < d; ++a) {
    double u = (x[a] - g.box[a].lo) / g.spacing(a);
    u = std::clamp(u, 0.0, static_cast<double>(g.nodes[a] - 1));
    auto i = static_cast<std::size_t>(std::floor(u));
    if (i + 1 >= g.nodes[a])
      i = g.nodes[a] - 2;
    lo[a] = i;
    frac[a] = u - static_cast<double>(i);
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    std::size_t node = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const bool up = (corner >> a) & 1u;
      w *= up ? frac[a] : 1.0 - frac[a];
      node = node * g.nodes[a] + lo[a] + (up ? 1 : 0);
    }
    if (w == 0.0)
      continue;
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] += w * s.values[node * s.fibre_dim + j];
  }
}

} // namespace

PointCloud flow_graph(const ChartSpec& chart, const Section& s0, const Multivector& generator, const FlowConfig& cfg) {
  validate_section(chart, s0);
  const Grid grid = config_grid(chart, cfg);
  std::vector<CompiledPoly> comps;
  for (const auto& c : s0.components)
    comps.emplace_back(c);
  std::vector<double> z(chart.vars()->size(), 0.0);
  auto seed = [&](std::span<const double> x, std::span<double> p) {
    for (std::size_t a = 0; a < x.size(); ++a)
      z[chart.base()[a]] = x[a];
    for (std::size_t j = 0; j < p.size(); ++j)
      p[j] = comps[j](z);
  };
  return flow_graph_impl(chart, grid, seed, generator, cfg);
}

PointCloud flow_graph(const ChartSpec& chart, const SectionGrid& s0, const Multivector& generator,
                      const FlowConfig& cfg) {
  if (s0.grid.dim() != chart.base_dim() || s0.fibre_dim != chart.fibre_dim())
    throw InputError("section grid does not match the chart");
  auto seed = [&](std::span<const double> x, std::span<double> p) { interpolate(s0, x, p); };
  return flow_graph_impl(chart, s0.grid, seed, generator, cfg);
}

// --- Transport PDE ----------------------------------------------------------

SectionGrid transport_section(const ChartSpec& chart, const SectionGrid& s0, const Multivector& generator,
                              const FlowConfig& cfg) {
  cfg.validate();
  const Grid& grid = s0.grid;
  const std::size_t d = chart.base_dim(), m = chart.fibre_dim();
  if (grid.dim() != d || s0.fibre_dim != m)
    throw InputError("section grid does not match the chart");
  const std::size_t steps = cfg.steps();
  const FieldSchedule schedule(field_components(chart, generator), chart.time(), 0, to_rational(cfg.t1), steps);
  const double h = schedule.step();
  const double bound = blowup_bound(chart);
  const std::size_t nn = grid.node_count();
  const std::size_t nvars = chart.vars()->size();

  std::vector<double> coords(nn * d);
  for (std::size_t node = 0; node < nn; ++node)
    grid.coords(node, std::span<double>(coords.data() + node * d, d));

  std::vector<std::size_t> stride(d, 1);
  for (std::size_t a = d - 1; a-- > 0;)
    stride[a] = stride[a + 1] * grid.nodes[a + 1];
  std::vector<double> inv2h(d);
  for (std::size_t a = 0; a < d; ++a)
    inv2h[a] = 1.0 / (2.0 * grid.spacing(a));

  // F(S) at half-step j.
  std::vector<double> z(nvars, 0.0), dz(nvars, 0.0);
  auto rhs = [&](const std::vector<double>& s, std::size_t half_step, std::vector<double>& out) {
    for (std::size_t node = 0; node < nn; ++node) {
      for (std::size_t a = 0; a < d; ++a)
        z[chart.base()[a]] = coords[node * d + a];
      for (std::size_t j = 0; j < m; ++j)
        z[chart.fibre()[j]] = s[node * m + j];
      std::fill(dz.begin(), dz.end(), 0.0);
      schedule.eval(half_step, z.data(), dz.data());
      for (std::size_t j = 0; j < m; ++j) {
        double v = dz[chart.fibre()[j]];
        for (std::size_t a = 0; a < d; ++a) {
          const double speed = dz[chart.base()[a]];
          if (speed == 0.0)
            continue;
          const std::size_t i = (node / stride[a]) % grid.nodes[a];
          const std::size_t n_a = grid.nodes[a];
          const double* col = s.data() + j;
          auto at = [&](std::size_t idx) { return col[(node + idx * stride[a] - i * stride[a]) * m]; };
          double deriv;
          if (i == 0)
            deriv = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h[a];
          else if (i + 1 == n_a)
            deriv = (3.0 * at(n_a - 1) - 4.0 * at(n_a - 2) + at(n_a - 3)) * inv2h[a];
          else
            deriv = (at(i + 1) - at(i - 1)) * inv2h[a];
          v -= deriv * speed;
        }
        out[node * m + j] = v;
      }
    }
  };

  std::vector<double> s = s0.values, k1(s.size()), k2(s.size()), k3(s.size()), k4(s.size()), tmp(s.size());
  for (std::size_t k = 0; k < steps; ++k) {
    rhs(s, 2 * k, k1);
    for (std::size_t i = 0; i < s.size(); ++i)
      tmp[i] = s[i] + 0.5 * h * k1[i];
    rhs(tmp, 2 * k + 1, k2);
    for (std::size_t i = 0; i < s.size(); ++i)
      tmp[i] = s[i] + 0.5 * h * k2[i];
    rhs(tmp, 2 * k + 1, k3);
    for (std::size_t i = 0; i < s.size(); ++i)
      tmp[i] = s[i] + h * k3[i];
    rhs(tmp, 2 * k + 2, k4);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(s[i]) || std::abs(s[i]) > bound) {
        std::ostringstream msg;
        msg << "section blew up during transport at t = " << static_cast<double>(k + 1) * h;
        throw NumericAbort(msg.str());
      }
    }
  }
  return SectionGrid{grid, m, std::move(s)};
}

SectionGrid gauge_transport(const ChartSpec& chart, const SectionGrid& s0, const ScalarFn& f_t,
                            const FlowConfig& cfg) {
  require_same_vars(chart.vars(), f_t.vars());
  if (f_t.depends_on_kind(VarKind::fibre))
    throw InputError("gauge family must depend on base variables and t only");
  return transport_section(chart, s0, hamiltonian_vf(chart, f_t), cfg);
}

SectionGrid extended_gauge_transport(const ChartSpec& chart, const SectionGrid& s0, const Multivector& x_t,
                                     const FlowConfig& cfg) {
  cfg.validate();
  require_same_vars(chart.vars(), x_t.vars());
  const Rational t1 = to_rational(cfg.t1);
  for (const Rational& t : std::vector<Rational>{Rational(0), Rational(t1 / 2), t1}) {
    const std::size_t tv = chart.time();
    const Multivector at_t = x_t.map_coefficients([&](const ScalarFn& c) { return c.substitute(tv, t); });
    if (!centralizer_check(chart, at_t))
      throw InputError("generator does not commute with pi at t = " + rational_to_string(t));
  }
  return transport_section(chart, s0, x_t, cfg);
}

// --- Reconstruction ---------------------------------------------------------

namespace {

// Uniform bucket index over the cloud's base coordinates.
class NeighbourIndex {
public:
  NeighbourIndex(const PointCloud& cloud, const Grid& grid) : cloud_(cloud), d_(cloud.base_dim) {
    const std::size_t n = cloud.size();
    lo_.assign(d_, std::numeric_limits<double>::infinity());
    hi_.assign(d_, -std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < d_; ++a) {
      lo_[a] = std::min(lo_[a], grid.box[a].lo);
      hi_[a] = std::max(hi_[a], grid.box[a].hi);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < d_; ++a) {
        lo_[a] = std::min(lo_[a], cloud.point(i)[a]);
        hi_[a] = std::max(hi_[a], cloud.point(i)[a]);
      }
    double volume = 1.0;
    for (std::size_t a = 0; a < d_; ++a)
      volume *= std::max(hi_[a] - lo_[a], 1e-12);
    const double target = std::pow(2.0 * volume / static_cast<double>(std::max<std::size_t>(n, 1)),
                                   1.0 / static_cast<double>(d_));
    cells_.resize(d_);
    width_.resize(d_);
    min_width_ = std::numeric_limits<double>::infinity();
    std::size_t total = 1;
    for (std::size_t a = 0; a < d_; ++a) {
      const double extent = std::max(hi_[a] - lo_[a], 1e-12);
      cells_[a] = std::clamp<std::size_t>(static_cast<std::size_t>(extent / target), 1, 4096);
      width_[a] = extent / static_cast<double>(cells_[a]);
      min_width_ = std::min(min_width_, width_[a]);
      total *= cells_[a];
    }
    start_.assign(total + 1, 0);
    std::vector<std::size_t> cell_of(n);
    for (std::size_t i = 0; i < n; ++i) {
      cell_of[i] = flat(cell_coords(cloud.point(i).data()));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < total; ++c)
      start_[c + 1] += start_[c];
    order_.resize(n);
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      order_[fill[cell_of[i]]++] = i;
  }

  // k nearest points to x, sorted by distance.
  std::vector<std::pair<double, std::size_t>> nearest(const double* x, std::size_t k) const {
    std::vector<std::pair<double, std::size_t>> best;
    const auto centre = cell_coords(x);
    std::size_t max_ring = 0;
    for (auto c : cells_)
      max_ring = std::max(max_ring, c);
    std::vector<long> offset(d_);
    for (std::size_t r = 0; r <= max_ring; ++r) {
      visit_ring(centre, static_cast<long>(r), offset, 0, false, [&](std::size_t cell) {
        for (std::size_t q = start_[cell]; q < start_[cell + 1]; ++q) {
          const std::size_t idx = order_[q];
          const auto p = cloud_.point(idx);
          double dist2 = 0.0;
          for (std::size_t a = 0; a < d_; ++a)
            dist2 += (p[a] - x[a]) * (p[a] - x[a]);
          best.emplace_back(dist2, idx);
        }
      });
      if (best.size() >= k) {
        std::partial_sort(best.begin(), best.begin() + static_cast<long>(k), best.end());
        best.resize(k);
        const double reach = static_cast<double>(r) * min_width_;
        if (best.back().first <= reach * reach)
          break;
      }
    }
    std::sort(best.begin(), best.end());
    if (best.size() > k)
      best.resize(k);
    for (auto& b : best)
      b.first = std::sqrt(b.first);
    return best;
  }

private:
  std::vector<long> cell_coords(const double* x) const {
    std::vector<long> c(d_);
    for (std::size_t a = 0; a < d_; ++a) {
      const long i = static_cast<long>(std::floor((x[a] - lo_[a]) / width_[a]));
      c[a] = std::clamp<long>(i, 0, static_cast<long>(cells_[a]) - 1);
    }
    return c;
  }

  std::size_t flat(const std::vector<long>& c) const {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < d_; ++a)
      idx = idx * cells_[a] + static_cast<std::size_t>(c[a]);
    return idx;
  }

  // Cells at Chebyshev distance exactly r from the centre.
  template <typename Fn>
  void visit_ring(const std::vector<long>& centre, long r, std::vector<long>& offset, std::size_t axis,
                  bool on_shell, Fn&& fn) const {
    if (axis == d_) {
      if (!on_shell && r != 0)
        return;
      std::vector<long> c(d_);
      for (std::size_t a = 0; a < d_; ++a) {
        c[a] = centre[a] + offset[a];
        if (c[a] < 0 || c[a] >= static_cast<long>(cells_[a]))
          return;
      }
      fn(flat(c));
      return;
    }
    for (long o = -r; o <= r; ++o) {
      offset[axis] = o;
      visit_ring(centre, r, offset, axis + 1, on_shell || o == -r || o == r, fn);
    }
  }

  const PointCloud& cloud_;
  std::size_t d_;
  std::vector<double> lo_, hi_, width_;
  std::vector<std::size_t> cells_;
  double min_width_;
  std::vector<std::size_t> start_, order_;
};

// Least-squares solve of the normal equations a x = b (a symmetric positive
// semidefinite, n x n, rhs right-hand sides) by Cholesky with diagonal
// pivoting. Directions whose pivot falls below rel_tol * max diagonal are
// dropped and their unknowns set to zero. Returns false if nothing survives.
bool solve_normal(std::vector<double>& a, std::vector<double>& b, std::size_t n, std::size_t rhs, double rel_tol) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i)
    perm[i] = i;
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, a[i * n + i]);
  if (!(max_diag > 0.0))
    return false;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[perm[i] * n + perm[j]]; };
  std::size_t rank = 0;
  for (; rank < n; ++rank) {
    std::size_t piv = rank;
    for (std::size_t i = rank + 1; i < n; ++i)
      if (at(i, i) > at(piv, piv))
        piv = i;
    if (!(at(piv, piv) > rel_tol * max_diag))
      break;
    std::swap(perm[rank], perm[piv]);
    const double l = std::sqrt(at(rank, rank));
    at(rank, rank) = l;
    for (std::size_t i = rank + 1; i < n; ++i)
      at(i, rank) /= l;
    // Both triangles: later pivots permute rows and columns.
    for (std::size_t j = rank + 1; j < n; ++j)
      for (std::size_t i = rank + 1; i < n; ++i)
        at(i, j) -= at(i, rank) * at(j, rank);
  }
  if (rank == 0)
    return false;
  std::vector<double> y(n * rhs, 0.0);
  for (std::size_t c = 0; c < rhs; ++c) {
    for (std::size_t i = 0; i < rank; ++i) {
      double v = b[perm[i] * rhs + c];
      for (std::size_t j = 0; j < i; ++j)
        v -= at(i, j) * y[j * rhs + c];
      y[i * rhs + c] = v / at(i, i);
    }
    for (std::size_t i = rank; i-- > 0;) {
      double v = y[i * rhs + c];
      for (std::size_t j = i + 1; j < rank; ++j)
        v -= at(j, i) * y[j * rhs + c];
      y[i * rhs + c] = v / at(i, i);
    }
  }
  std::fill(b.begin(), b.end(), 0.0);
  for (std::size_t i = 0; i < rank; ++i)
    for (std::size_t c = 0; c < rhs; ++c)
      b[perm[i] * rhs + c] = y[i * rhs + c];
  return true;
}

} // namespace

Reconstruction reconstruct_section(const PointCloud& cloud, const Grid& grid, const FlowConfig& cfg) {
  if (cloud.size() == 0)
    throw InputError("cannot reconstruct from an empty cloud");
  if (grid.dim() != cloud.base_dim)
    throw InputError("cloud and grid dimensions differ");
  const std::size_t d = cloud.base_dim, m = cloud.fibre_dim;
  const std::size_t k =
      std::min(cloud.size(), cfg.interpolation_k ? std::size_t{cfg.interpolation_k} : (std::size_t{2} << d));
  double diag = 0.0;
  for (const auto& iv : grid.box)
    diag += iv.width() * iv.width();
  const double max_reach = 0.25 * std::sqrt(diag);

  const NeighbourIndex index(cloud, grid);
  Reconstruction out{SectionGrid{grid, m, std::vector<double>(grid.node_count() * m)}};
  std::vector<double> x(d);
  const std::size_t np = d + 1;
  std::vector<double> a(np * np), b(np * m), delta(d);

  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    grid.coords(node, x);
    const auto nbrs = index.nearest(x.data(), k);
    if (nbrs.empty() || nbrs.back().first > max_reach) {
      std::ostringstream msg;
      msg << "no cloud points near grid node " << node << "; the flowed graph left the box";
      throw NumericAbort(msg.str());
    }
    const double r_k = nbrs.back().first;
    const double scale = std::max(r_k, 1e-300);
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    double wsum = 0.0;
    for (const auto& [r, idx] : nbrs) {
      const auto p = cloud.point(idx);
      const double w = 1.0 / (r + 0.01 * r_k + 1e-300);
      wsum += w;
      double row[8];
      row[0] = 1.0;
      for (std::size_t i = 0; i < d; ++i)
        row[1 + i] = (p[i] - x[i]) / scale;
      for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = 0; j < np; ++j)
          a[i * np + j] += w * row[i] * row[j];
        for (std::size_t c = 0; c < m; ++c)
          b[i * m + c] += w * row[i] * p[d + c];
      }
    }
    // Offsets are scaled by r_k, so a coplanar neighbour set shows up as a
    // tiny pivot and its normal direction is dropped.
    std::vector<double> coef = b;
    std::vector<double> mat = a;
    const bool ok = solve_normal(mat, coef, np, m, 1e-12);
    double residual = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      double value;
      if (ok) {
        value = coef[c];
      } else {
        double num = 0.0;
        for (const auto& [r, idx] : nbrs)
          num += cloud.point(idx)[d + c] / (r + 0.01 * r_k + 1e-300);
        value = num / wsum;
      }
      out.section.values[node * m + c] = value;
    }
    for (const auto& [r, idx] : nbrs) {
      const auto p = cloud.point(idx);
      double dist2 = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        double fit = ok ? coef[c] : out.section.values[node * m + c];
        if (ok)
          for (std::size_t i = 0; i < d; ++i)
            fit += coef[(1 + i) * m + c] * (p[i] - x[i]) / scale;
        dist2 += (p[d + c] - fit) * (p[d + c] - fit);
      }
      residual = std::max(residual, std::sqrt(dist2));
    }
    out.max_fit_residual = std::max(out.max_fit_residual, residual);
  }
  out.non_graph = out.max_fit_residual > 10.0 * cfg.tol_graph;
  return out;
}

FlowReport compare_sections(const SectionGrid& a, const SectionGrid& b) {
  if (!(a.grid == b.grid) || a.fibre_dim != b.fibre_dim)
    throw InputError("sections are sampled on different grids");
  FlowReport report;
  const std::size_t m = a.fibre_dim;
  report.per_node.resize(a.grid.node_count());
  for (std::size_t node = 0; node < report.per_node.size(); ++node) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double diff = a.values[node * m + j] - b.values[node * m + j];
      d2 += diff * diff;
    }
    report.per_node[node] = std::sqrt(d2);
    report.sup_error = std::max(report.sup_error, report.per_node[node]);
  }
  return report;
}

} // namespace coiso
