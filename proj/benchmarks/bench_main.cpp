#include <benchmark/benchmark.h>

#include "anderson/expansion.hpp"
#include "anderson/green.hpp"
#include "anderson/hamiltonian.hpp"
#include "anderson/selfenergy.hpp"

using namespace anderson;

static void BM_FreeGreenTable(benchmark::State& state) {
    const TorusGrid grid{static_cast<int>(state.range(0)), true};
    for (auto _ : state) benchmark::DoNotOptimize(free_green_table(-0.5, 6, grid));
}
BENCHMARK(BM_FreeGreenTable)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_DeltaSelfEnergy(benchmark::State& state) {
    auto u = SingleSitePotential::delta();
    for (auto _ : state) benchmark::DoNotOptimize(solve_sigma_overlapping(0.05, -0.1, 0.0, u));
}
BENCHMARK(BM_DeltaSelfEnergy)->Unit(benchmark::kMillisecond);

static void BM_DipoleSelfEnergy(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(solve_sigma_dipole(0.1, -0.05, 0.0));
}
BENCHMARK(BM_DipoleSelfEnergy)->Unit(benchmark::kMillisecond);

static void BM_ResolventColumn(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    Box b{Site{}, L};
    auto u = SingleSitePotential::delta();
    auto H = FiniteHamiltonian::build(b, 0.2, u, sample_disorder(DisorderDensity::uniform(), Region(b), u, SeedRecord{1, 0}));
    for (auto _ : state) {
        ResolventSolver s(H, -0.1, 0.0);
        benchmark::DoNotOptimize(s.column(Site{}));
    }
}
BENCHMARK(BM_ResolventColumn)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_InertiaCount(benchmark::State& state) {
    Region r = Region::cuboid(Site{0, 0, 0}, Site{7, 7, 7});
    auto u = SingleSitePotential::delta();
    auto H = FiniteHamiltonian::build(r, 0.3, u, sample_disorder(DisorderDensity::uniform(), r, u, SeedRecord{2, 0}));
    for (auto _ : state) benchmark::DoNotOptimize(count_below(H.matrix(), -0.05));
}
BENCHMARK(BM_InertiaCount)->Unit(benchmark::kMillisecond);

static void BM_TelescopingResidual(benchmark::State& state) {
    Region r(Box{Site{}, 2});
    auto u = SingleSitePotential::delta();
    auto se = self_energy_on_region(r, u, 0.1, -0.05, 1e-3);
    auto H = FiniteHamiltonian::build(r, 0.1, u, sample_disorder(DisorderDensity::uniform(), r, u, SeedRecord{3, 0}));
    auto ops = make_box_operators(H, se.sigma, -0.05, 1e-3);
    for (auto _ : state) benchmark::DoNotOptimize(telescoping_residual(static_cast<int>(state.range(0)), ops));
}
BENCHMARK(BM_TelescopingResidual)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
