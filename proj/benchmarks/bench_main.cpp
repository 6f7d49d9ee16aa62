#include "neveu/criteria.hpp"
#include "neveu/generator.hpp"
#include "neveu/simulator.hpp"
#include "neveu/test_functions.hpp"

#include <benchmark/benchmark.h>

using namespace neveu;

static void BM_EvalGenerator(benchmark::State& state) {
    const auto f = exp_neg(2.0);
    const ModelParams p(1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(eval_generator(f, 1.0, p).total);
}
BENCHMARK(BM_EvalGenerator);

static void BM_EvalGeneratorPatched(benchmark::State& state) {
    const auto f = loglog_inf(2);
    const ModelParams p(2.5, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(eval_generator(f, 3.0, p).total);
}
BENCHMARK(BM_EvalGeneratorPatched);

static void BM_Certify(benchmark::State& state) {
    const ModelParams p(1, 1);
    const auto g = exp_neg(canonical_lambda0(0.5, 2.0, p));
    for (auto _ : state) benchmark::DoNotOptimize(certify(g, {0.5, 2.0}, Direction::L_ge_dg, p).index());
}
BENCHMARK(BM_Certify)->Unit(benchmark::kMillisecond);

static void BM_Step(benchmark::State& state) {
    const ModelParams p(1, 1);
    const auto s = SimScheme::defaults(p);
    Xoshiro256pp rng(StreamId{1, 0});
    for (auto _ : state) benchmark::DoNotOptimize(step(1.0, 1e-3, p, s, rng));
}
BENCHMARK(BM_Step);

static void BM_PlanStepLargeState(benchmark::State& state) {
    const ModelParams p(3, 0);
    const auto s = SimScheme::defaults(p);
    for (auto _ : state) benchmark::DoNotOptimize(plan_step(1e5, 1.0, p, s).dt);
}
BENCHMARK(BM_PlanStepLargeState);

static void BM_RunPathDown(benchmark::State& state) {
    const ModelParams p(1, 1);
    const auto s = SimScheme::defaults(p);
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_path(1.0, 0.5, 2.0, p, s, StreamId{3, i++}).steps);
}
BENCHMARK(BM_RunPathDown)->Unit(benchmark::kMicrosecond);

static void BM_RunPathComedown(benchmark::State& state) {
    const ModelParams p(3, 0);
    auto s = SimScheme::defaults(p);
    s.t_max = 1.0;
    s.dt_max = 1e-2;
    s.x_max = 1e50;
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_path(1e5, 10.0, kInfinity, p, s, StreamId{4, i++}).steps);
}
BENCHMARK(BM_RunPathComedown)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
