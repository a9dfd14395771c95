#include <benchmark/benchmark.h>

#include "psusp/base_system.hpp"
#include "psusp/fock.hpp"
#include "psusp/joinings.hpp"
#include "psusp/poisson.hpp"
#include "psusp/spectral.hpp"

using namespace psusp;

static void BM_BoolePreimage(benchmark::State& state) {
    const auto sys = BaseSystem::boole();
    const auto a = IntervalSet::interval(-1, 1);
    const auto n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(sys.preimage(a, n));
}
BENCHMARK(BM_BoolePreimage)->DenseRange(2, 12, 2);

static void BM_TowerIntersectSequence(benchmark::State& state) {
    RankOneSpec s{{3, 3, 3, 12}, {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}, std::vector<int>(12, 0)}, 27.0};
    s.spacers[3][11] = 40;
    const auto sys = BaseSystem::rank_one(s);
    const auto a = IntervalSet::interval(0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(intersect_sequence(sys, a, 40));
}
BENCHMARK(BM_TowerIntersectSequence);

static void BM_SamplePoisson(benchmark::State& state) {
    const auto sys = BaseSystem::boole();
    const auto w = IntervalSet::interval(0, static_cast<double>(state.range(0)));
    std::uint64_t t = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_poisson(sys, w, SeededSampler{1, t++}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePoisson)->Range(8, 4096);

static void BM_CountCovariance(benchmark::State& state) {
    const auto sys = BaseSystem::boole();
    const auto a = IntervalSet::interval(-1, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_count_covariance(sys, a, a, 3, state.range(0), {1, 0}, Parallelism{1}));
    }
}
BENCHMARK(BM_CountCovariance)->Arg(10'000)->Unit(benchmark::kMillisecond);

static void BM_Convolve(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto a = CircleMeasure::uniform(m);
    const auto b = CircleMeasure::spike(m, 1);
    for (auto _ : state) benchmark::DoNotOptimize(convolve(a, b));
}
BENCHMARK(BM_Convolve)->RangeMultiplier(4)->Range(256, 65536);

static void BM_ExpSpectralType(benchmark::State& state) {
    const auto sigma = CircleMeasure::spike_at(4096, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(exp_spectral_type(sigma));
}
BENCHMARK(BM_ExpSpectralType);

static void BM_Permanent(benchmark::State& state) {
    CounterEngine rng(3);
    const CMatrix m = random_gaussian(static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(permanent(m));
}
BENCHMARK(BM_Permanent)->DenseRange(2, 12, 2);

static void BM_FockExponential(benchmark::State& state) {
    CounterEngine rng(4);
    const int d = static_cast<int>(state.range(0));
    const CMatrix psi = random_contraction(d, rng);
    const SymFockSpace space(d, static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(fock_exponential(psi, space));
}
BENCHMARK(BM_FockExponential)->Args({2, 4})->Args({4, 4})->Args({4, 6});

static void BM_SampleJoining(benchmark::State& state) {
    const auto sys = BaseSystem::boole();
    const auto spec = builtin_joining_specs()[3];
    const auto w = IntervalSet::interval(-2, 2);
    std::uint64_t t = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_joining(spec, sys, w, w, SeededSampler{2, t++}));
}
BENCHMARK(BM_SampleJoining);
BENCHMARK_MAIN();
