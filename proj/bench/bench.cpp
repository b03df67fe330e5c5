#include <benchmark/benchmark.h>

#include "hel/ergodic.hpp"
#include "hel/sampling.hpp"

using namespace hel;

namespace {

System golden() { return System::torus_rotation(Group::integers(), 1, {{kGoldenRotation, 0.0, 0.0}}); }

void BM_Convergence(benchmark::State& state) {
    const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
    const auto f = observables::hyperbolic_loop(golden());
    ConvergenceSetup s;
    s.omega_samples = 8;
    s.schedule_exponent = static_cast<std::size_t>(state.range(1));
    s.tolerance = 0.05;
    s.quad.precision = 1e-5;
    const auto folner = FolnerSequence::interval(Group::integers());
    for (auto _ : state) benchmark::DoNotOptimize(convergence_experiment(f, folner, s, exec));
    state.SetLabel(state.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_Convergence)->ArgsProduct({{0, 1}, {8, 11}})->Unit(benchmark::kMillisecond);

void BM_Maximal(benchmark::State& state) {
    const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
    const auto f = observables::circle(golden());
    const auto h = finite_valued_approximation(f, 0.5);
    MaximalSetup m;
    m.omega_samples = 64;
    m.horizon = 256;
    m.audit_omegas = 4;
    const auto folner = FolnerSequence::interval(Group::integers());
    for (auto _ : state) benchmark::DoNotOptimize(maximal_experiment(f, h, folner, m, exec));
    state.SetLabel(state.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_Maximal)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_W2(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    CounterRng rng(3);
    const auto sp = SpaceDescriptor::hyperboloid2();
    std::vector<SpacePoint> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
        xs.push_back(sampling::random_point(sp, rng));
        ys.push_back(sampling::random_point(sp, rng));
    }
    const auto mu = FiniteMeasure::uniform(xs), nu = FiniteMeasure::uniform(ys);
    TransportOptions t;
    t.support_cap = 4096;
    for (auto _ : state) benchmark::DoNotOptimize(w2_distance(mu, nu, t));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W2)->RangeMultiplier(2)->Range(8, 256)->Unit(benchmark::kMicrosecond)->Complexity();

void BM_Barycentre(benchmark::State& state) {
    CounterRng rng(5);
    const auto spaces = sampling::standard_spaces();
    const auto& sp = spaces.at(static_cast<std::size_t>(state.range(0))).space;
    const auto mu = sampling::random_measure(sp, rng, 8);
    for (auto _ : state) benchmark::DoNotOptimize(barycentre(mu));
    state.SetLabel(spaces[static_cast<std::size_t>(state.range(0))].name);
}
BENCHMARK(BM_Barycentre)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
