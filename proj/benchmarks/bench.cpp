#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "ellipvol/inverse.hpp"
#include "ellipvol/montecarlo.hpp"
#include "ellipvol/verify.hpp"
#include "ellipvol/volumes.hpp"

using namespace ellipvol;

static void BM_GValue(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(g_value(3.0, 2.0, 1.0));
    }
}
BENCHMARK(BM_GValue);

static void BM_Forward(benchmark::State& state) {
    const Semiaxes s(3.0, 2.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(s));
    }
}
BENCHMARK(BM_Forward);

static void BM_ForwardJacobian(benchmark::State& state) {
    const Semiaxes s(3.0, 2.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_jacobian(s));
    }
}
BENCHMARK(BM_ForwardJacobian);

static void BM_ForwardAspect(benchmark::State& state) {
    const double r = std::pow(10.0, static_cast<double>(state.range(0)));
    const Semiaxes s(r, 1.0, 1.0 / r);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(s));
    }
}
BENCHMARK(BM_ForwardAspect)->DenseRange(0, 3);  // aspect 1 .. 10^6

static void BM_Invert(benchmark::State& state) {
    std::mt19937_64 rng(7u);
    std::uniform_real_distribution<double> u(std::log(0.1), std::log(10.0));
    for (auto _ : state) {
        state.PauseTiming();
        const Semiaxes truth(std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)));
        const IntrinsicVolumes target = forward(truth);
        state.ResumeTiming();
        benchmark::DoNotOptimize(invert(target));
    }
}
BENCHMARK(BM_Invert)->Unit(benchmark::kMicrosecond);

static void BM_McTsirelson(benchmark::State& state) {
    const SemiaxesN s({2.0, 1.0, 0.5});
    const McSpec spec{static_cast<std::uint64_t>(state.range(0)), 1u, 4};
    for (auto _ : state) {
        benchmark::DoNotOptimize(mc_tsirelson(s, 2, spec));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McTsirelson)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

static void BM_DistPointEllipsoid(benchmark::State& state) {
    const Semiaxes s(2.0, 1.0, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dist_point_ellipsoid({1.7, 1.3, 0.9}, s));
    }
}
BENCHMARK(BM_DistPointEllipsoid);

static void BM_TraceCurve(benchmark::State& state) {
    const Semiaxes start(2.0, 1.5, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(trace_intersection_curve(start, 0.05, 5000));
    }
}
BENCHMARK(BM_TraceCurve)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
