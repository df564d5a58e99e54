#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "coiso/errors.hpp"
#include "coiso/flow.hpp"
#include "coiso/scenarios.hpp"
#include "support.hpp"

using namespace coiso;
using coiso::testing::mv;
using coiso::testing::section_of;

namespace {

FlowConfig small_config(std::vector<std::size_t> grid, double t1 = 1.0, double dt = 1e-2) {
  FlowConfig cfg;
  cfg.dt = dt;
  cfg.t1 = t1;
  cfg.grid = std::move(grid);
  return cfg;
}

double max_abs_diff(const SectionGrid& s, const std::function<double(std::span<const double>, std::size_t)>& exact) {
  std::vector<double> x(s.grid.dim());
  double err = 0.0;
  for (std::size_t node = 0; node < s.grid.node_count(); ++node) {
    s.grid.coords(node, x);
    for (std::size_t j = 0; j < s.fibre_dim; ++j)
      err = std::max(err, std::abs(s.at(node)[j] - exact(x, j)));
  }
  return err;
}

} // namespace

TEST(Grid, CoordinatesAndSpacing) {
  const Grid g = make_grid({Interval{0.0, 1.0}, Interval{-1.0, 1.0}}, {3, 5});
  EXPECT_EQ(g.node_count(), 15u);
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.5);
  EXPECT_DOUBLE_EQ(g.spacing(1), 0.5);
  std::vector<double> x(2);
  g.coords(0, x);
  EXPECT_EQ(x, (std::vector<double>{0.0, -1.0}));
  g.coords(1, x);
  EXPECT_EQ(x, (std::vector<double>{0.0, -0.5}));
  g.coords(14, x);
  EXPECT_EQ(x, (std::vector<double>{1.0, 1.0}));
  EXPECT_THROW(make_grid({Interval{}}, {2}), InputError);
  EXPECT_THROW(make_grid({Interval{1.0, 0.0}}, {3}), InputError);
}

TEST(FlowConfig, Validation) {
  FlowConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.steps(), 1000u);
  cfg.dt = 2.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = FlowConfig{};
  cfg.oversample = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = FlowConfig{};
  cfg.tol_graph = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  EXPECT_EQ(default_grid_nodes(3), (std::vector<std::size_t>{65, 65, 5}));
}

TEST(FlowGraph, ZeroGeneratorIsIdentity) {
  const auto chart = lagrangian_chart(2);
  const auto cfg = small_config({9, 9});
  const Section s0 = section_of(chart, {"x1*x2", "x1^2 - x2"});
  const auto cloud = flow_graph(chart, s0, Multivector(chart.vars(), 1), cfg);
  const auto rec = reconstruct_section(cloud, config_grid(chart, cfg), cfg);
  EXPECT_FALSE(rec.non_graph);
  const auto expected = sample_section(chart, s0, config_grid(chart, cfg));
  EXPECT_LT(compare_sections(rec.section, expected).sup_error, 1e-2);
  // Lattice points are untouched.
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    EXPECT_EQ(p[2], p[0] * p[1]);
  }
}

TEST(FlowGraph, HamiltonianOfBaseCoordinateTranslatesFibre) {
  const auto chart = lagrangian_chart(1);
  const auto cfg = small_config({17});
  const auto cloud = flow_graph(chart, zero_section(chart), hamiltonian_vf(chart, chart.var("x1")), cfg);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    EXPECT_NEAR(cloud.point(i)[1], -1.0, 1e-14);
  const auto rec = reconstruct_section(cloud, config_grid(chart, cfg), cfg);
  EXPECT_FALSE(rec.non_graph);
  EXPECT_LT(max_abs_diff(rec.section, [](auto, std::size_t) { return -1.0; }), 1e-12);
}

TEST(FlowGraph, GraphAndPdeAgreeOnLagrangianChart) {
  const auto chart = lagrangian_chart(2);
  const auto cfg = small_config({17, 17}, 0.5);
  const ScalarFn f = chart.parse("x1*x2 + 1/2*x1^2");
  const Multivector x = hamiltonian_vf(chart, f);
  const auto grid = config_grid(chart, cfg);
  const auto rec = reconstruct_section(flow_graph(chart, zero_section(chart), x, cfg), grid, cfg);
  const auto pde = gauge_transport(chart, sample_section(chart, zero_section(chart), grid), f, cfg);
  EXPECT_LT(compare_sections(rec.section, pde).sup_error, 1e-9);
  // s = -t1 * df.
  EXPECT_LT(max_abs_diff(pde, [](std::span<const double> p, std::size_t j) {
              return j == 0 ? -0.5 * (p[1] + p[0]) : -0.5 * p[0];
            }),
            1e-12);
}

TEST(FlowGraph, DeterministicBitForBit) {
  const auto chart = lagrangian_chart(2);
  const auto cfg = small_config({9, 9}, 0.05);
  const Multivector x = mv(chart.vars(), "p1 + t", {"x1"}) + mv(chart.vars(), "x1*x2", {"p2"});
  const Section s0 = section_of(chart, {"x2", "x1^2"});
  const auto a = flow_graph(chart, s0, x, cfg);
  const auto b = flow_graph(chart, s0, x, cfg);
  EXPECT_EQ(a.points, b.points);
  const auto grid = config_grid(chart, cfg);
  EXPECT_EQ(reconstruct_section(a, grid, cfg).section.values, reconstruct_section(b, grid, cfg).section.values);
}

TEST(FlowGraph, EscapeAborts) {
  const auto chart = lagrangian_chart(1);
  const auto cfg = small_config({9});
  EXPECT_THROW(flow_graph(chart, zero_section(chart), mv(chart.vars(), "1", {"x1"}), cfg), NumericAbort);
}

TEST(FlowGraph, FibreBlowupAborts) {
  const auto chart = lagrangian_chart(1);
  const auto cfg = small_config({9}, 2.0, 1e-3);
  const Section one = section_of(chart, {"1"});
  EXPECT_THROW(flow_graph(chart, one, mv(chart.vars(), "p1^2", {"p1"}), cfg), NumericAbort);
  const auto grid = config_grid(chart, cfg);
  EXPECT_THROW(transport_section(chart, sample_section(chart, one, grid), mv(chart.vars(), "p1^2", {"p1"}), cfg),
               NumericAbort);
}

TEST(FlowGraph, RejectsBadInput) {
  const auto chart = lagrangian_chart(1);
  const auto cfg = small_config({9});
  EXPECT_THROW(flow_graph(chart, zero_section(chart), chart.pi(), cfg), InputError);
  auto bad = cfg;
  bad.grid = {9, 9};
  EXPECT_THROW(flow_graph(chart, zero_section(chart), Multivector(chart.vars(), 1), bad), InputError);
}

TEST(Rk4, FourthOrderConvergence) {
  // dp/dt = t * p, p(0) = 1, so p(1) = exp(1/2).
  const auto vars = chart_vars({"x1"}, {"p1"});
  const std::vector<std::pair<std::size_t, ScalarFn>> field{{1, parse("t*p1", vars)}};
  auto error = [&](std::size_t steps) {
    const FieldSchedule schedule(field, 2, 0, 1, steps);
    std::vector<double> z{0.0, 1.0, 0.0};
    auto work = schedule.make_workspace(z.size());
    for (std::size_t k = 0; k < steps; ++k)
      schedule.rk4_step(k, z, work);
    return std::abs(z[1] - std::exp(0.5));
  };
  for (std::size_t steps : {5u, 10u, 20u}) {
    const double coarse = error(steps), fine = error(2 * steps);
    EXPECT_GE(coarse / fine, 8.0) << steps;
  }
}

TEST(Rk4, BlockMatchesScalar) {
  const auto vars = chart_vars({"x1", "x2"}, {"p1", "p2"});
  const std::vector<std::pair<std::size_t, ScalarFn>> field{{0, parse("x2*t + p1", vars)},
                                                            {1, parse("-x1", vars)},
                                                            {2, parse("x1^2*p2 - t", vars)},
                                                            {5, parse("x1*x2", vars)}};
  const FieldSchedule schedule(field, 4, 0, 1, 10);
  const std::size_t dim = 6, count = 5;
  std::vector<double> block(dim * count);
  for (std::size_t v = 0; v < dim; ++v)
    for (std::size_t i = 0; i < count; ++i)
      block[v * count + i] = v == 4 ? 0.0 : 0.1 * static_cast<double>(i + 1) - 0.05 * static_cast<double>(v);
  std::vector<std::vector<double>> scalar(count, std::vector<double>(dim));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t v = 0; v < dim; ++v)
      scalar[i][v] = block[v * count + i];
  auto work = schedule.make_workspace(dim * count);
  for (std::size_t k = 0; k < schedule.steps(); ++k) {
    schedule.rk4_step_block(k, block, count, work);
    for (auto& z : scalar)
      schedule.rk4_step(k, z, work);
  }
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t v = 0; v < dim; ++v)
      if (v != 4)
        EXPECT_EQ(block[v * count + i], scalar[i][v]);
}

TEST(Transport, TorusContractionField) {
  const auto chart = torus_chart();
  OneForm beta{chart.vars(), {}};
  beta.components.insert_or_assign(chart.vars()->index("th3"), ScalarFn(chart.vars(), 1));
  const Multivector x = contract(chart.pi(), beta);
  const auto cfg = small_config({9, 9, 5}, 0.5);
  const auto grid = config_grid(chart, cfg);
  const auto s = extended_gauge_transport(chart, sample_section(chart, zero_section(chart), grid), x, cfg);
  EXPECT_LT(max_abs_diff(s, [](auto, std::size_t) { return -0.5; }), 1e-12);
}

TEST(Transport, RejectsNonCentralizingField) {
  const auto chart = lagrangian_chart(1);
  const auto cfg = small_config({9});
  const auto grid = config_grid(chart, cfg);
  EXPECT_THROW(extended_gauge_transport(chart, sample_section(chart, zero_section(chart), grid),
                                        mv(chart.vars(), "x1", {"x1"}), cfg),
               InputError);
}

TEST(Transport, VerticalGaugeIsLinearInTime) {
  const auto chart = lagrangian_chart(2);
  const auto cfg = small_config({9, 9}, 0.75);
  const auto grid = config_grid(chart, cfg);
  const auto s = gauge_transport(chart, sample_section(chart, zero_section(chart), grid), chart.parse("x1*x2"), cfg);
  EXPECT_LT(max_abs_diff(s, [](std::span<const double> p, std::size_t j) { return -0.75 * p[1 - j]; }), 1e-12);
  EXPECT_THROW(gauge_transport(chart, sample_section(chart, zero_section(chart), grid), chart.parse("p1"), cfg),
               InputError);
}

TEST(Transport, TimeDependentFamily) {
  // f_t = t*x1 gives s(x) = -t1^2/2 on the first fibre.
  const auto chart = lagrangian_chart(2);
  const auto cfg = small_config({9, 9});
  const auto grid = config_grid(chart, cfg);
  const auto s = gauge_transport(chart, sample_section(chart, zero_section(chart), grid), chart.parse("t*x1"), cfg);
  EXPECT_LT(max_abs_diff(s, [](auto, std::size_t j) { return j == 0 ? -0.5 : 0.0; }), 1e-13);
}

TEST(Reconstruct, ExactOnAffineData) {
  const Grid grid = make_grid({Interval{}, Interval{}}, {9, 9});
  PointCloud cloud{2, 1, {}};
  for (int i = 0; i <= 32; ++i)
    for (int j = 0; j <= 32; ++j) {
      const double x = -1.0 + i / 16.0, y = -1.0 + j / 16.0;
      cloud.points.insert(cloud.points.end(), {x, y, 2.0 * x - y + 0.25});
    }
  FlowConfig cfg;
  const auto rec = reconstruct_section(cloud, grid, cfg);
  EXPECT_FALSE(rec.non_graph);
  EXPECT_LT(rec.max_fit_residual, 1e-12);
  EXPECT_LT(max_abs_diff(rec.section, [](std::span<const double> p, std::size_t) { return 2.0 * p[0] - p[1] + 0.25; }),
            1e-12);
}

TEST(Reconstruct, TranslatedCloudShiftsValues) {
  const Grid grid = make_grid({Interval{}}, {9});
  PointCloud cloud{1, 1, {}};
  for (int i = 0; i <= 64; ++i) {
    const double x = -1.2 + 2.4 * i / 64.0;
    cloud.points.insert(cloud.points.end(), {x, std::sin(x)});
  }
  FlowConfig cfg;
  const auto rec = reconstruct_section(cloud, grid, cfg);
  EXPECT_FALSE(rec.non_graph);
  EXPECT_LT(max_abs_diff(rec.section, [](std::span<const double> p, std::size_t) { return std::sin(p[0]); }), 1e-3);
}

TEST(Reconstruct, TwoSheetFoldIsFlagged) {
  const Grid grid = make_grid({Interval{}}, {9});
  PointCloud cloud{1, 1, {}};
  for (int i = 0; i <= 64; ++i) {
    const double x = -1.0 + i / 32.0;
    cloud.points.insert(cloud.points.end(), {x, 1.0});
    cloud.points.insert(cloud.points.end(), {x, -1.0});
  }
  FlowConfig cfg;
  EXPECT_TRUE(reconstruct_section(cloud, grid, cfg).non_graph);
}

TEST(Reconstruct, SparseCloudAborts) {
  const Grid grid = make_grid({Interval{}}, {9});
  PointCloud cloud{1, 1, {-1.0, 0.0, -0.95, 0.0, -0.9, 0.0, -0.85, 0.0, -0.8, 0.0}};
  FlowConfig cfg;
  EXPECT_THROW(reconstruct_section(cloud, grid, cfg), NumericAbort);
}

TEST(CompareSections, SupAndPerNode) {
  const Grid grid = make_grid({Interval{}}, {3});
  const SectionGrid a{grid, 2, {0, 0, 1, 1, 2, 2}};
  const SectionGrid b{grid, 2, {0, 0, 1, 4, 2, 2}};
  const auto r = compare_sections(a, b);
  EXPECT_DOUBLE_EQ(r.sup_error, 3.0);
  EXPECT_EQ(r.per_node, (std::vector<double>{0.0, 3.0, 0.0}));
  const SectionGrid c{make_grid({Interval{}}, {5}), 2, std::vector<double>(10)};
  EXPECT_THROW(compare_sections(a, c), InputError);
}
