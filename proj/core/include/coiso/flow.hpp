#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "coiso/chart.hpp"
#include "coiso/multivector.hpp"

namespace coiso {

// Uniform lattice over a box; node index is row-major with the last axis
// fastest.
struct Grid {
  std::vector<Interval> box;
  std::vector<std::size_t> nodes;

  std::size_t dim() const { return box.size(); }
  std::size_t node_count() const;
  double spacing(std::size_t axis) const;
  void coords(std::size_t node, std::span<double> out) const;

  bool operator==(const Grid& other) const;
};

// Validates nodes >= 3 per axis.
Grid make_grid(std::vector<Interval> box, std::vector<std::size_t> nodes);

// 65 nodes on the first two base axes, 5 on any further axis.
std::vector<std::size_t> default_grid_nodes(std::size_t base_dim);

struct SectionGrid {
  Grid grid;
  std::size_t fibre_dim = 0;
  std::vector<double> values;  // fibre_dim entries per node

  std::span<const double> at(std::size_t node) const {
    return {values.data() + node * fibre_dim, fibre_dim};
  }
};

SectionGrid sample_section(const ChartSpec& chart, const Section& s, const Grid& grid);
SectionGrid constant_section(const Grid& grid, std::span<const double> value);

struct FlowConfig {
  double dt = 1e-3;
  double t1 = 1.0;
  unsigned oversample = 4;
  // Nearest neighbours used by reconstruct_section; 0 selects 2^(d+1).
  unsigned interpolation_k = 0;
  // Nodes per base axis; empty selects default_grid_nodes.
  std::vector<std::size_t> grid;
  double tol_graph = 1e-3;

  void validate() const;
  std::size_t steps() const;
};

Grid config_grid(const ChartSpec& chart, const FlowConfig& cfg);

// Polynomial vector field (possibly time dependent) compiled at every RK4
// stage time of a fixed-step schedule from t_start to t_end. Components write
// into state slots; slots below the chart size are chart coordinates, higher
// slots are free accumulators.
class FieldSchedule {
public:
  FieldSchedule(std::vector<std::pair<std::size_t, ScalarFn>> components, std::size_t time_var,
                const Rational& t_start, const Rational& t_end, std::size_t steps);

  std::size_t steps() const noexcept { return steps_; }
  double step() const noexcept { return h_; }
  const std::vector<std::size_t>& slots() const noexcept { return slots_; }

  // Scratch space for rk4_step; one per concurrent caller.
  std::vector<double> make_workspace(std::size_t state_dim) const { return std::vector<double>(4 * state_dim); }

  // One classical RK4 step number `k` applied in place to the state `z`.
  void rk4_step(std::size_t k, std::span<double> z, std::vector<double>& work) const;
  // The same step on `count` states stored column-wise: variable v of state
  // i is z[v * count + i]. Results match rk4_step bit for bit.
  void rk4_step_block(std::size_t k, std::span<double> z, std::size_t count, std::vector<double>& work) const;
  // Field at half-step index j (time t_start + j*h/2), written to dz[slot].
  void eval(std::size_t half_step, const double* z, double* dz) const;

private:
  const std::vector<CompiledPoly>& stage(std::size_t half_step) const;

  std::vector<std::size_t> slots_;
  std::vector<std::vector<CompiledPoly>> stages_;  // one entry if autonomous
  std::size_t steps_;
  double h_;
};

Rational to_rational(double x);

struct PointCloud {
  std::size_t base_dim = 0;
  std::size_t fibre_dim = 0;
  std::vector<double> points;  // base coordinates then fibre values, per point

  std::size_t size() const { return points.size() / (base_dim + fibre_dim); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * (base_dim + fibre_dim), base_dim + fibre_dim};
  }
};

// Points (x, s0(x)) on the oversampled lattice, advanced by RK4 under the full
// vector field `generator` (degree 1, may depend on t) to cfg.t1. Throws
// NumericAbort when a trajectory leaves the base box inflated by 10% per side.
PointCloud flow_graph(const ChartSpec& chart, const Section& s0, const Multivector& generator, const FlowConfig& cfg);
PointCloud flow_graph(const ChartSpec& chart, const SectionGrid& s0, const Multivector& generator,
                      const FlowConfig& cfg);

// Transport of a section under the vertical projection of a vector field:
//   ds/dt = b(x, s) - Ds(x) a(x, s),
// with (a, b) the base/fibre components of the field on the graph.
SectionGrid transport_section(const ChartSpec& chart, const SectionGrid& s0, const Multivector& generator,
                              const FlowConfig& cfg);

// Transport under X_{pi^* f_t}; f_t depends on base variables and t only.
SectionGrid gauge_transport(const ChartSpec& chart, const SectionGrid& s0, const ScalarFn& f_t,
                            const FlowConfig& cfg);

// Transport under X_t after checking [Pi, X_t] = 0 exactly at t = 0, t1/2, t1.
SectionGrid extended_gauge_transport(const ChartSpec& chart, const SectionGrid& s0, const Multivector& x_t,
                                     const FlowConfig& cfg);

struct Reconstruction {
  SectionGrid section;
  bool non_graph = false;
  double max_fit_residual = 0.0;
};

// Local linear least-squares fit (inverse-distance weights) of the fibre
// values of the k nearest cloud points at every grid node. The fit residual
// over those neighbours above 10 * tol_graph flags a non-graph cloud.
Reconstruction reconstruct_section(const PointCloud& cloud, const Grid& grid, const FlowConfig& cfg);

struct FlowReport {
  double sup_error = 0.0;
  std::vector<double> per_node;
  bool non_graph = false;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
};

// Sup and per-node Euclidean distances in the fibre.
FlowReport compare_sections(const SectionGrid& a, const SectionGrid& b);

} // namespace coiso
