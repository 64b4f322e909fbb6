#include "vqnnf/codebook.hpp"
#include "vqnnf/features.hpp"
#include "vqnnf/integral.hpp"
#include "vqnnf/matching.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace vqnnf;

namespace {

FeatureMap noise_features(int width, int height, int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    FeatureMap f(height, width, channels);
    for (float& v : f.data) v = dist(rng);
    return f;
}

// Args: query width, query height, k, S.
void BM_MatchStage(benchmark::State& state) {
    const FeatureMap q = noise_features(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 27, 1);
    const FeatureMap t = crop(q, {40, 40, 32, 32});
    MatchConfig mc;
    mc.k = static_cast<int>(state.range(2));
    mc.scales = static_cast<int>(state.range(3));
    for (auto _ : state) {
        MatchOutput out = match(t, q, mc);
        benchmark::DoNotOptimize(out.result.score);
        state.counters["heatmap_ms"] = out.timings.heatmap_ms;
    }
    state.SetItemsProcessed(state.iterations() * (q.width - 31) * (q.height - 31));
}
BENCHMARK(BM_MatchStage)
    ->Args({640, 360, 128, 3})
    ->Args({1280, 720, 128, 3})
    ->Args({1280, 720, 64, 3})
    ->Args({640, 360, 128, 1})
    ->Unit(benchmark::kMillisecond);

void BM_ComputeHeatmap(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    const FeatureMap q = noise_features(640, 360, 27, 2);
    const FeatureMap t = crop(q, {100, 100, 32, 32});
    MatchConfig mc;
    mc.k = k;
    const Codebook cb = fit_codebook(t, k, mc.max_iters, mc.seed);
    const NnfLabelMap tn = assign_nnf(t, cb), qn = assign_nnf(q, cb);
    const FilterPlan plan = make_plan(mc, t.width, t.height);
    const ResponseSet tr = template_responses(integral_histogram(tn, cb.k()), plan);
    for (auto _ : state) benchmark::DoNotOptimize(compute_heatmap(tr, qn, plan).scores.data());
}
BENCHMARK(BM_ComputeHeatmap)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_AssignNnf(benchmark::State& state) {
    const FeatureMap q = noise_features(640, 360, static_cast<int>(state.range(0)), 3);
    const Codebook cb = fit_codebook(crop(q, {0, 0, 32, 32}), 128, 100, 0);
    for (auto _ : state) benchmark::DoNotOptimize(assign_nnf(q, cb).labels.data());
}
BENCHMARK(BM_AssignNnf)->Arg(9)->Arg(27)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
