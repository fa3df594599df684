#include <benchmark/benchmark.h>

#include <cmath>

#include "tfilm/diagnostics.hpp"
#include "tfilm/solver.hpp"
#include "tfilm/stencil.hpp"

using namespace tfilm;

namespace {

Field test_field(int nx) { return make_random(Grid(nx, nx, 1.0), 5, 0.4); }

void BM_gradient(benchmark::State& state) {
  const Field f = test_field(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gradient(f));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_gradient)->Arg(128)->Arg(256)->Arg(512);

void BM_laplacian(benchmark::State& state) {
  const Field f = test_field(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(laplacian(f));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_laplacian)->Arg(128)->Arg(256)->Arg(512);

void BM_third_derivatives(benchmark::State& state) {
  const Field f = test_field(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(third_derivatives(f));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_third_derivatives)->Arg(128)->Arg(256);

void BM_explicit_step(benchmark::State& state) {
  const Field f = test_field(static_cast<int>(state.range(0)));
  SolverConfig cfg;
  cfg.mobility = MobilityModel(2.0, 1e-10 * f.max_abs());
  cfg.t_end = 1.0;
  cfg.snapshot_every = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(step(f, cfg));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_explicit_step)->Arg(128)->Arg(256)->Arg(512);

void BM_explicit_step_1d(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)), 1, 1.0);
  const Field f = make_travelwave1d(g, 0.3, 64.0 * g.spacing(), 1.0);
  SolverConfig cfg;
  cfg.mobility = MobilityModel(1.0, 1e-10 * f.max_abs(), false);
  cfg.t_end = 1.0;
  cfg.snapshot_every = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(step(f, cfg));
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(BM_explicit_step_1d)->Arg(1024)->Arg(4096);

void BM_smoothed_averages(benchmark::State& state) {
  const Field f = test_field(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(smoothed_averages(f, 0.125, {0.5, 0.5}));
}
BENCHMARK(BM_smoothed_averages)->Arg(128)->Arg(256);

void BM_tilt_excess(benchmark::State& state) {
  const Field f = test_field(static_cast<int>(state.range(0)));
  const AnnulusAverages ref = smoothed_averages(f, 0.125, {0.5, 0.5});
  for (auto _ : state)
    benchmark::DoNotOptimize(tilt_excess(f, 0.125, ref, {0.5, 0.5}));
}
BENCHMARK(BM_tilt_excess)->Arg(128)->Arg(256);

void BM_bernis_gruen(benchmark::State& state) {
  const Field f = test_field(static_cast<int>(state.range(0)));
  const CutoffProfile cut(CutoffKind::BallCutoff);
  for (auto _ : state)
    benchmark::DoNotOptimize(bernis_gruen_sides(f, 2.0, cut, {0.5, 0.5}, 0.125));
}
BENCHMARK(BM_bernis_gruen)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
