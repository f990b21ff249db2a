#include <random>

#include <benchmark/benchmark.h>

#include "wsnloc/field.hpp"
#include "wsnloc/moea.hpp"
#include "wsnloc/nbp.hpp"

namespace {

using namespace wsnloc;

ParticleSet random_set(std::size_t m) {
    ParticleSet s;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 100);
    for (std::size_t i = 0; i < m; ++i) {
        s.samples.push_back({u(rng), u(rng)});
        s.weights.push_back(1.0 / static_cast<double>(m));
    }
    s.bandwidth = kde_bandwidth(s.samples, s.weights, 15);
    return s;
}

void BM_KdeEval(benchmark::State& state) {
    const auto set = random_set(static_cast<std::size_t>(state.range(0)));
    const Kde kde(set);
    double x = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kde({x, 50}));
        x = x > 99 ? 0 : x + 0.37;
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdeEval)->Arg(50)->Arg(100)->Arg(300);

void BM_RunNbp(benchmark::State& state) {
    auto anchors = place_anchors_preset(Placement::edge, 9, field_box(100, 100), 0);
    auto scenario = build_scenario(100, 100, 15, 100, anchors, 1);
    MeasurementModel model;
    auto ranges = measure_ranges(scenario, model, 2);
    NbpParams params;
    params.particles = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_nbp(scenario, ranges, model, params, 3));
}
BENCHMARK(BM_RunNbp)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_NondominatedSort(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> err(0, 30);
    std::uniform_int_distribution<std::size_t> count(3, 12);
    std::vector<ObjectiveVector> objs(static_cast<std::size_t>(state.range(0)));
    for (auto& o : objs) o = {err(rng), count(rng), false};
    for (auto _ : state) benchmark::DoNotOptimize(nondominated_sort(objs));
}
BENCHMARK(BM_NondominatedSort)->Arg(40)->Arg(80)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
