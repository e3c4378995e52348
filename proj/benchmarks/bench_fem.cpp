#include <benchmark/benchmark.h>

#include "pmc/forward.hpp"
#include "pmc/linearize.hpp"

namespace {

void BM_MeshGeneration(benchmark::State& state) {
    const int level = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pmc::generate_disk_mesh(level));
    }
}
BENCHMARK(BM_MeshGeneration)->Arg(3)->Arg(4)->Arg(5);

void BM_StiffnessAssembly(benchmark::State& state) {
    const pmc::Mesh mesh = pmc::generate_disk_mesh(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pmc::assemble_stiffness(mesh));
    }
}
BENCHMARK(BM_StiffnessAssembly)->Arg(4)->Arg(5);

void BM_ForwardSolve(benchmark::State& state) {
    const pmc::Mesh mesh = pmc::generate_disk_mesh(static_cast<int>(state.range(0)));
    pmc::ScalarField u_exact(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i)
        u_exact[i] = (1.0 - mesh.nodes[i].squaredNorm()) / 4.0;
    const pmc::ScalarField H = pmc::manufactured_source(mesh, u_exact);
    const pmc::BoundaryFunction f = pmc::boundary_trace(mesh, u_exact);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pmc::solve_pmc(mesh, H, f));
    }
}
BENCHMARK(BM_ForwardSolve)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ConductivitySolve(benchmark::State& state) {
    const pmc::Mesh mesh = pmc::generate_disk_mesh(static_cast<int>(state.range(0)));
    const pmc::MetricField m = pmc::identity_metric(mesh.num_triangles());
    const pmc::BoundaryFunction f =
        pmc::boundary_sample(mesh, [](double th) { return std::cos(th); });
    for (auto _ : state) {
        benchmark::DoNotOptimize(pmc::solve_conductivity(mesh, m, f));
    }
}
BENCHMARK(BM_ConductivitySolve)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace
