#include <benchmark/benchmark.h>

#include <random>

#include "screen/geometry.hpp"
#include "screen/newtonian.hpp"
#include "screen/relaxed_solver.hpp"
#include "screen/surface_charge.hpp"

using namespace screen;

namespace {

ScalarField random_field(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    ScalarField f(g);
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = d(rng);
    return f;
}

void BM_PotentialFFT(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec g({0, 0, 0}, 1.0 / n, {n, n, n});
    const ScalarField w = random_field(g, 1);
    NewtonianOperator op(g);
    for (auto _ : state) benchmark::DoNotOptimize(op.apply(w));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}
BENCHMARK(BM_PotentialFFT)->Arg(32)->Arg(64)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_ProjectAdmissible(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    std::normal_distribution<double> d(0.5, 1.0);
    std::vector<double> v0(n), cap(n, 1.0);
    for (auto& x : v0) x = d(rng);
    for (auto _ : state) {
        std::vector<double> v = v0;
        benchmark::DoNotOptimize(project_admissible(v, cap, 1.0, 0.25 * static_cast<double>(n)));
    }
}
BENCHMARK(BM_ProjectAdmissible)->Arg(1 << 15)->Arg(1 << 18)->Arg(1 << 21);

void BM_ObstacleBall(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    const auto ball = DomainSpec::ball({}, 1.0);
    const GridSpec g = grid_for_box(working_box(ball, 0.3), h);
    const ScalarField plus = rasterize(ball, g);
    SolveConfig cfg;
    cfg.sor_omega = 1.9;
    for (auto _ : state) benchmark::DoNotOptimize(solve_obstacle(plus, g, cfg));
}
BENCHMARK(BM_ObstacleBall)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_SurfaceSphere(benchmark::State& state) {
    const auto ball = DomainSpec::ball({}, 1.0);
    const SolveConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(solve_surface_measure(ball, static_cast<int>(state.range(0)), cfg));
}
BENCHMARK(BM_SurfaceSphere)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
