#include <benchmark/benchmark.h>

#include "tedl/dataset.hpp"
#include "tedl/pairwise.hpp"

using namespace tedl;

namespace {

const LabeledDataset& strings() {
    static const LabeledDataset data = generate_strings(1);
    return data;
}

std::vector<Tree> first(int n) {
    const auto& t = strings().trees;
    return {t.begin(), t.begin() + std::min<size_t>(n, t.size())};
}

template <bool Parallel>
void pairwise(benchmark::State& state) {
    auto forests = index_forests(first(static_cast<int>(state.range(0))));
    ExplicitCostMatrix c = ExplicitCostMatrix::unit(strings().alphabet.size());
    for (auto _ : state) {
        Eigen::MatrixXd d = Parallel ? pairwise_ted_parallel(forests, forests, c)
                                     : pairwise_ted_serial(forests, forests, c);
        benchmark::DoNotOptimize(d.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void contexts(benchmark::State& state) {
    auto trees = first(static_cast<int>(state.range(0)));
    std::vector<std::pair<int, int>> requests;
    for (int i = 0; i < static_cast<int>(trees.size()); ++i) {
        for (int j = 0; j < static_cast<int>(trees.size()); ++j) requests.emplace_back(i, j);
    }
    ExplicitCostMatrix c = ExplicitCostMatrix::unit(strings().alphabet.size());
    for (auto _ : state) {
        auto ctx = Parallel ? make_contexts_parallel(trees, trees, requests, c, ScriptPolicy::average)
                            : make_contexts_serial(trees, trees, requests, c, ScriptPolicy::average);
        benchmark::DoNotOptimize(ctx.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(requests.size()));
}

}

BENCHMARK(pairwise<false>)->Name("pairwise_ted/serial")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(pairwise<true>)->Name("pairwise_ted/parallel")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(contexts<false>)->Name("contexts/serial")->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(contexts<true>)->Name("contexts/parallel")->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
