#include <benchmark/benchmark.h>

#include "pmc/cgo.hpp"

namespace {

void BM_CauchyTransform(benchmark::State& state) {
    const pmc::ComplexGrid grid =
        pmc::ComplexGrid::with_spacing(1.0 / static_cast<double>(state.range(0)));
    const pmc::CauchyTransform ct(grid);
    const pmc::ComplexGridField f = pmc::sample_field(grid, [](pmc::Complex z) {
        return pmc::smooth_cutoff(std::abs(z)) * std::exp(-4.0 * std::norm(z));
    });
    for (auto _ : state) {
        benchmark::DoNotOptimize(ct.apply(f));
    }
    state.SetComplexityN(grid.n);
}
BENCHMARK(BM_CauchyTransform)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_NeumannRemainder(benchmark::State& state) {
    const pmc::ComplexGrid grid = pmc::ComplexGrid::with_spacing(0.01);
    const pmc::CauchyTransform ct(grid);
    const pmc::CGOPhase phase =
        pmc::make_phase(pmc::PhaseKind::holomorphic, pmc::Complex(0.0, 0.1));
    const pmc::ComplexGridField q = pmc::sample_field(grid, [](pmc::Complex z) {
        return 0.8 * pmc::smooth_cutoff(std::abs(z)) * std::exp(-6.0 * std::norm(z));
    });
    const pmc::ComplexGridField a =
        pmc::sample_field(grid, [](pmc::Complex) { return pmc::Complex(1.0, 0.0); });
    const double h = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pmc::neumann_remainder(ct, q, a, phase, h, 1e-8));
    }
}
BENCHMARK(BM_NeumannRemainder)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
