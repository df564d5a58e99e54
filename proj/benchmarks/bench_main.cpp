#include <benchmark/benchmark.h>

#include "coiso/flow.hpp"
#include "coiso/linfty.hpp"
#include "coiso/sampling.hpp"
#include "coiso/scenarios.hpp"
#include "coiso/transversal.hpp"

using namespace coiso;

namespace {

void BM_Schouten(benchmark::State& state) {
  const auto vars = chart_vars({"x1", "x2"}, {"p1", "p2"});
  const std::vector<std::size_t> all{0, 1, 2, 3};
  Sampler sampler(1);
  std::vector<std::pair<Multivector, Multivector>> pairs;
  for (int i = 0; i < 64; ++i)
    pairs.emplace_back(sampler.multivector(vars, all, static_cast<unsigned>(state.range(0)), all, 2),
                       sampler.multivector(vars, all, 2, all, 2));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(schouten(a, b));
  }
}
BENCHMARK(BM_Schouten)->Arg(1)->Arg(2)->Arg(3);

void BM_McSeries(benchmark::State& state) {
  const auto chart = make_scenario(state.range(0) == 0 ? "lagrangian_n2" : "hypersurface").chart;
  Sampler sampler(2);
  std::vector<Section> sections;
  for (int i = 0; i < 32; ++i)
    sections.push_back(sampler.section(chart, 2));
  std::size_t i = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(mc_series(chart, sections[i++ % sections.size()]));
}
BENCHMARK(BM_McSeries)->Arg(0)->Arg(1);

void BM_FlowGraph(benchmark::State& state) {
  const auto chart = lagrangian_chart(2);
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.grid = {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))};
  const Multivector x = hamiltonian_vf(chart, chart.parse("x1*x2"));
  for (auto _ : state)
    benchmark::DoNotOptimize(flow_graph(chart, zero_section(chart), x, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.steps()) *
                          static_cast<long>((state.range(0) - 1) * 4 + 1) * ((state.range(0) - 1) * 4 + 1));
}
BENCHMARK(BM_FlowGraph)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  const auto chart = lagrangian_chart(2);
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.grid = {33, 33};
  const auto cloud = flow_graph(chart, zero_section(chart), hamiltonian_vf(chart, chart.parse("x1*x2")), cfg);
  const Grid grid = config_grid(chart, cfg);
  for (auto _ : state)
    benchmark::DoNotOptimize(reconstruct_section(cloud, grid, cfg));
}
BENCHMARK(BM_Reconstruct)->Unit(benchmark::kMillisecond);

void BM_HypersurfaceSection(benchmark::State& state) {
  const auto chart = hypersurface_chart();
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.grid = {17, 17, 3};
  const ScalarFn f = chart.parse("q*y1*y2");
  for (auto _ : state)
    benchmark::DoNotOptimize(hypersurface_section(chart, f, cfg));
}
BENCHMARK(BM_HypersurfaceSection)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
