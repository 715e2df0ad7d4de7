#include <benchmark/benchmark.h>

#include <vector>

#include "chains/cftp.hpp"
#include "chains/coupling.hpp"
#include "chains/decomposition.hpp"
#include "chains/kernels.hpp"

using namespace chains;

namespace {

Kernel bk_kernel() {
    BkSpec spec;
    spec.epsilon = 0.2;
    spec.r = 0.75;
    return Kernel{KernelSpec{spec}};
}

Kernel markov1() {
    MarkovSpec spec;
    spec.rows = {{0.6, 0.4}, {0.3, 0.7}};
    return Kernel{KernelSpec{spec}};
}

Past deep_past(std::size_t len) {
    std::vector<Symbol> pre(len);
    for (std::size_t i = 0; i < len; ++i) pre[i] = static_cast<Symbol>(1 + (i % 2));
    return Past(std::move(pre), 1);
}

void bench_bk_cum(benchmark::State& state) {
    const Kernel kernel = bk_kernel();
    const Past x = deep_past(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernel.cum(2, x.view()));
}
BENCHMARK(bench_bk_cum)->Arg(16)->Arg(256)->Arg(4096);

void bench_coupling_joint(benchmark::State& state) {
    const Kernel kernel = bk_kernel();
    const Past x = deep_past(64);
    const Past y = Past::constant(2);
    for (auto _ : state) benchmark::DoNotOptimize(coupling_joint(kernel, x.view(), y.view()));
}
BENCHMARK(bench_coupling_joint);

void bench_discrete_update(benchmark::State& state) {
    const Decomposition dec = bk_decompose(bk_kernel());
    rng::SubStream g(1, 2);
    const Past lo = Past::constant(1);
    const Past hi = Past::constant(2);
    for (auto _ : state) {
        const Label lab = dec.sample_label(g);
        benchmark::DoNotOptimize(dec.apply(lo.view(), hi.view(), lab));
    }
}
BENCHMARK(bench_discrete_update);

void bench_theta_markov(benchmark::State& state) {
    const Decomposition dec = greedy_decompose(markov1(), 1);
    std::uint64_t rep = 0;
    for (auto _ : state) {
        LabelStream labels(dec, rng::derive(9, rep++));
        benchmark::DoNotOptimize(theta(dec, labels, 0));
    }
}
BENCHMARK(bench_theta_markov);

void bench_stationary_window(benchmark::State& state) {
    const Decomposition dec = bk_decompose(bk_kernel());
    std::uint64_t rep = 0;
    const long long n = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_stationary(dec, n, rng::derive(11, rep++)));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bench_stationary_window)->Arg(64)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
