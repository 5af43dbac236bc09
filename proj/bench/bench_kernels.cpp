#include <random>

#include <benchmark/benchmark.h>

#include "cortex/harness.hpp"
#include "cortex/kernels.hpp"

using namespace cortex;

namespace {

std::mt19937_64& rng() {
    static std::mt19937_64 r(7);
    return r;
}

Grid<double> random_image(std::size_t side) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Grid<double> g(side, side);
    for (auto& v : g.data()) v = u(rng());
    return g;
}

Patch random_patch() {
    std::uniform_int_distribution<int> u(0, 4);
    Patch p{};
    while (p == Patch{})
        for (auto& v : p) v = static_cast<std::uint8_t>(u(rng()));
    return p;
}

Grid<int> random_ids(std::size_t side, int max_id) {
    std::uniform_int_distribution<int> u(0, max_id);
    Grid<int> g(side, side);
    for (auto& v : g.data()) v = u(rng());
    return g;
}

template <Grid<double> (*Fn)(const Grid<double>&, const Grid<double>&)>
void BM_correlate(benchmark::State& state) {
    const auto image = random_image(static_cast<std::size_t>(state.range(0)));
    const auto kernel = random_image(7);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(image, kernel));
}

template <void (*Fn)(std::span<const Patch>, const kernels::PrototypeView&, std::span<kernels::Match>)>
void BM_best_match(benchmark::State& state) {
    std::vector<Patch> vectors, tiles(961);
    std::vector<double> betas;
    for (int i = 0; i < state.range(0); ++i) {
        vectors.push_back(random_patch());
        betas.push_back(0.05);
    }
    for (auto& t : tiles) t = random_patch();
    std::vector<kernels::Match> out(tiles.size());
    for (auto _ : state) {
        Fn(tiles, {vectors, betas}, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <Grid<double> (*Fn)(const Grid<int>&, double, const Grid<int>&, int, ItMetric)>
void BM_it_grid(benchmark::State& state) {
    const auto object = random_ids(31, 100);
    const auto input = random_ids(31, 100);
    const int radius = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Fn(object, 1e-6, input, radius, ItMetric::euclidean));
}

void BM_catalog_run(benchmark::State& state) {
    ExperimentConfig c;
    c.parallel = state.range(0) != 0;
    c.dump_detail = false;
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c));
}

}  // namespace

BENCHMARK(BM_correlate<kernels::serial::correlate_valid>)->Name("correlate/serial")->Arg(100)->Arg(400);
BENCHMARK(BM_correlate<kernels::omp::correlate_valid>)->Name("correlate/omp")->Arg(100)->Arg(400)->UseRealTime();
BENCHMARK(BM_best_match<kernels::serial::best_match>)->Name("best_match/serial")->Arg(50)->Arg(150);
BENCHMARK(BM_best_match<kernels::omp::best_match>)->Name("best_match/omp")->Arg(50)->Arg(150)->UseRealTime();
BENCHMARK(BM_it_grid<kernels::serial::it_response_grid>)->Name("it_grid/serial")->Arg(5)->Arg(10);
BENCHMARK(BM_it_grid<kernels::omp::it_response_grid>)->Name("it_grid/omp")->Arg(5)->Arg(10)->UseRealTime();
BENCHMARK(BM_catalog_run)->Name("catalog_run")->ArgName("parallel")->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
