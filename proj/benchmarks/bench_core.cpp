#include <benchmark/benchmark.h>

#include "nmdecay/dynamics.hpp"
#include "nmdecay/spectral.hpp"

using namespace nmdecay;

namespace {

SystemSpec bench_spec(CaseId id, int n_env) {
    SystemSpec s;
    s.case_id = id;
    s.n_env = n_env;
    s.v0 = 0.1;
    return s;
}

void BM_Diagonalize(benchmark::State& state) {
    const auto h = build_hamiltonian(bench_spec(CaseId::III, static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(diagonalize(h));
    state.SetComplexityN(h.dim());
}
BENCHMARK(BM_Diagonalize)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SurvivalFromSpectrum(benchmark::State& state) {
    const auto h = build_hamiltonian(bench_spec(CaseId::IV, 200));
    const Spectrum s = diagonalize(h);
    const auto times = time_grid(40.0, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(survival_probability(h, s, times));
}
BENCHMARK(BM_SurvivalFromSpectrum)->Unit(benchmark::kMillisecond);

void BM_EchoSharedSpectrum(benchmark::State& state) {
    const SystemSpec s = bench_spec(CaseId::III, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(loschmidt_echo(s, 40.0, 0.05));
}
BENCHMARK(BM_EchoSharedSpectrum)->Arg(150)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_GreenFunctionPoles(benchmark::State& state) {
    const SystemSpec s = bench_spec(static_cast<CaseId>(state.range(0)), 200);
    for (auto _ : state) benchmark::DoNotOptimize(gf_poles(s, Direction::Forward));
}
BENCHMARK(BM_GreenFunctionPoles)->DenseRange(0, 5);

void BM_BandQuadrature(benchmark::State& state) {
    const SystemSpec s = bench_spec(CaseId::VI, 200);
    for (auto _ : state) benchmark::DoNotOptimize(BandQuadrature(s, 40.0).mass());
}
BENCHMARK(BM_BandQuadrature)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
