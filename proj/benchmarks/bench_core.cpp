#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "bubbletower/bubbles.hpp"
#include "bubbletower/initial_data.hpp"
#include "bubbletower/selector.hpp"
#include "bubbletower/solver.hpp"

using namespace bubbletower;

namespace {

ModelPtr sphere() { return std::make_shared<const Model>(make_model(ModelKind::SphereEquivariant, 1)); }

}  // namespace

static void Acceleration(benchmark::State& state) {
  const auto grid = RadialGrid::uniform(static_cast<std::size_t>(state.range(0)), 8.0);
  const auto s = make_initial_data(sphere(), "builtin:bump:amp=0.5,center=2,width=0.5", grid);
  const Stepper stepper(grid, s.model);
  std::vector<double> a(s.size());
  for (auto _ : state) {
    stepper.acceleration(s.psi.data(), a.data());
    benchmark::DoNotOptimize(a.data());
  }
  state.SetComplexityN(state.range(0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(Acceleration)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

static void LeapfrogStep(benchmark::State& state) {
  const auto grid = RadialGrid::uniform(static_cast<std::size_t>(state.range(0)), 8.0);
  FieldState s = make_initial_data(sphere(), "builtin:bump:amp=0.5,center=2,width=0.5", grid);
  const double dt = 0.5 * grid.h_min();
  for (auto _ : state) {
    s = step(s, dt);
    benchmark::DoNotOptimize(s.psi.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(LeapfrogStep)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

static void Energy(benchmark::State& state) {
  const auto grid = RadialGrid::uniform(static_cast<std::size_t>(state.range(0)), 8.0);
  const auto s = make_initial_data(sphere(), "builtin:bump:amp=0.5,center=2,width=0.5", grid);
  for (auto _ : state) benchmark::DoNotOptimize(energy(s).total);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(Energy)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

static void SelectTimes(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  SampledSeries g{{}, {}, SeriesMode::Blowup}, h = g;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 1.0 - std::pow(10.0, -9.0 * (i + 0.5) / n);
    g.times.push_back(t);
    h.times.push_back(t);
    g.values.push_back((1 - t) * (1 - t));
    h.values.push_back((1 - t) * std::cos(1.0 / (1 - t)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(select_times(g, h).certificates.data());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(SelectTimes)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity()->Unit(benchmark::kMillisecond);

static void DecomposeTower(benchmark::State& state) {
  const auto grid = RadialGrid::graded(6000, 200.0, 0.9985);
  const auto s = make_initial_data(sphere(), "builtin:two-bubble:inner=1e-3,outer=1,noise=1e-3,seed=7", grid);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(s).J());
}
BENCHMARK(DecomposeTower)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
