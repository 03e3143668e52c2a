#include <benchmark/benchmark.h>

#include <omp.h>

#include "mlao/training.hpp"

using namespace mlao;

namespace {

DatasetSpec bench_spec(std::size_t n)
{
    DatasetSpec s;
    s.n_samples = n;
    s.scheme_tag = SchemeTag::two_n;
    s.seed = 11;
    return s;
}

const Dataset& bench_data()
{
    static const Dataset d = generate_dataset(bench_spec(256));
    return d;
}

const NetworkModel& bench_model()
{
    static const NetworkModel m = [] {
        Rng rng(5);
        return init_model(rng, bench_data().spec.scheme());
    }();
    return m;
}

std::vector<Example<float>> batch(std::size_t n)
{
    std::vector<Example<float>> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = bench_data().records[i];
        out.push_back({r.input, r.label});
    }
    return out;
}

void BM_BatchGradientSerial(benchmark::State& state)
{
    const auto b = batch(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad_serial<float>(bench_model().network, b, {}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchGradientParallel(benchmark::State& state)
{
    const auto b = batch(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad<float>(bench_model().network, b, {}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DatasetSerial(benchmark::State& state)
{
    const auto spec = bench_spec(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(generate_dataset_serial(spec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DatasetParallel(benchmark::State& state)
{
    const auto spec = bench_spec(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(spec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvaluateSerial(benchmark::State& state)
{
    const auto p = network_predictor(bench_model());
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_serial(p, bench_data()));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(bench_data().size()));
}

void BM_EvaluateParallel(benchmark::State& state)
{
    const auto p = network_predictor(bench_model());
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(p, bench_data()));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(bench_data().size()));
}

} // namespace

BENCHMARK(BM_BatchGradientSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradientParallel)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DatasetSerial)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DatasetParallel)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateParallel)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv)
{
    benchmark::Initialize(&argc, argv);
    benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
