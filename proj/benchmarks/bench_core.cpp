#include <benchmark/benchmark.h>

#include "hetplace/baselines.hpp"
#include "hetplace/fusion.hpp"
#include "hetplace/milp.hpp"
#include "hetplace/simulator.hpp"
#include "hetplace/solver.hpp"
#include "hetplace/synthetic.hpp"

using namespace hetplace;

namespace {

CompGraph graph(int depth, int width, int devices) {
    SyntheticSpec s;
    s.depth = depth;
    s.width = width;
    s.density = 0.6;
    s.num_devices = devices;
    return gen_synthetic(s, 1);
}

Cluster cluster(int devices) {
    ClusterSpec cs;
    cs.num_devices = devices;
    cs.link_prob = 0.5;
    cs.mem_min = cs.mem_max = 64ull << 30;
    return gen_cluster(cs, 1);
}

void BM_gcof(benchmark::State& st) {
    const auto g = graph(static_cast<int>(st.range(0)), 4, 2);
    const auto rules = FusionRuleSet::eigen_gpu_defaults();
    for (auto _ : st) benchmark::DoNotOptimize(gcof(g, rules));
    st.counters["ops"] = static_cast<double>(g.num_nodes());
}
BENCHMARK(BM_gcof)->Arg(8)->Arg(32)->Arg(128);

void BM_solve_exact(benchmark::State& st) {
    const int K = static_cast<int>(st.range(1));
    const auto g = gcof(graph(static_cast<int>(st.range(0)), 2, K), FusionRuleSet::eigen_gpu_defaults());
    const Instance inst(g, cluster(K), effective_bandwidth(cluster(K)));
    for (auto _ : st) benchmark::DoNotOptimize(solve_exact(inst));
    st.counters["ops"] = static_cast<double>(g.num_nodes());
}
BENCHMARK(BM_solve_exact)->Args({3, 2})->Args({4, 3})->Args({5, 3})->Unit(benchmark::kMillisecond);

void BM_greedy(benchmark::State& st) {
    const auto g = graph(static_cast<int>(st.range(0)), 4, 4);
    const Instance inst(g, cluster(4), effective_bandwidth(cluster(4)));
    for (auto _ : st) benchmark::DoNotOptimize(greedy_place(inst, BaselineKind::EarliestFinish));
    st.counters["ops"] = static_cast<double>(g.num_nodes());
}
BENCHMARK(BM_greedy)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_simulate(benchmark::State& st) {
    const auto g = graph(static_cast<int>(st.range(0)), 4, 4);
    const auto c = cluster(4);
    const auto mesh = effective_bandwidth(c);
    const auto p = greedy_place(Instance(g, c, mesh), BaselineKind::EarliestFinish).placement;
    for (auto _ : st) benchmark::DoNotOptimize(simulate(g, c, mesh, p));
    st.counters["ops"] = static_cast<double>(g.num_nodes());
}
BENCHMARK(BM_simulate)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_build_model(benchmark::State& st) {
    const auto g = graph(static_cast<int>(st.range(0)), 3, 3);
    const auto c = cluster(3);
    const auto mesh = effective_bandwidth(c);
    for (auto _ : st) benchmark::DoNotOptimize(to_lp_string(build_model(g, c, mesh)));
    st.counters["binaries"] = static_cast<double>(count_binaries(g, 3));
}
BENCHMARK(BM_build_model)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
