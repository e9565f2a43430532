// Microbenchmarks for the hot paths: the per-step filter update, a whole
// branch over a stream, clustering, and the full detection pipeline.
// Throughput is reported as items/s where an item is one input event.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "evspike/dbscan.hpp"
#include "evspike/events.hpp"
#include "evspike/lif.hpp"
#include "evspike/pipeline.hpp"
#include "evspike/synthetic.hpp"

namespace {

using namespace evspike;

SceneSpec busy_scene(std::int64_t duration_us) {
    SceneSpec spec;
    spec.geometry = {346, 260};
    spec.duration_us = duration_us;
    spec.objects.push_back({1, 4.0, 120.0, 12, 24, 400.0, 0.0, MovingObjectSpec::Fill::kSolid});
    spec.objects.push_back({2, 4.0, 40.0, 12, 24, 120.0, 0.0, MovingObjectSpec::Fill::kSolid});
    spec.noise_rate_hz_per_pixel = 1.0;
    spec.static_regions.push_back({BoundingBox{200, 60, 231, 91}});
    spec.static_rate_hz_per_pixel = 50.0 / 1024.0;
    spec.rng_seed = 7;
    return spec;
}

EventStream busy_stream(std::int64_t duration_us) {
    return strip_labels(generate(busy_scene(duration_us)).events);
}

void BM_lif_step(benchmark::State& state) {
    const SensorGeometry g{128, 128};
    const LifParams params{};
    MembraneGrid grid(g);
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::int32_t> px(0, 127);
    const std::int64_t n_events = state.range(0);
    std::vector<Event> step_events(static_cast<std::size_t>(n_events));
    std::int64_t step = 0;
    for (auto _ : state) {
        state.PauseTiming();
        for (auto& e : step_events) e = Event{step, px(rng), px(rng), Polarity::kOn};
        state.ResumeTiming();
        benchmark::DoNotOptimize(lif_step(grid, step, step_events, params));
        ++step;
    }
    state.SetItemsProcessed(state.iterations() * n_events);
}
BENCHMARK(BM_lif_step)->Arg(64)->Arg(512);

void BM_run_branch(benchmark::State& state) {
    const SensorGeometry g{346, 260};
    const TimeBase tb{0, 1000};
    LifParams params;
    params.beta = 0.93;
    params.u_thr = 0.75;
    const EventStream stream = busy_stream(1'000'000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_branch(stream, tb, params, g));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.size()));
}
BENCHMARK(BM_run_branch);

void BM_dbscan(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> blob(0.0, 6.0);
    std::uniform_real_distribution<double> center(20.0, 300.0);
    std::vector<Point2> points;
    for (int c = 0; c < 8; ++c) {
        const double cx = center(rng), cy = center(rng);
        for (int i = 0; i < state.range(0) / 8; ++i) {
            points.push_back({cx + blob(rng), cy + blob(rng)});
        }
    }
    const DbscanParams params{8.0, 10};
    for (auto _ : state) {
        benchmark::DoNotOptimize(dbscan(points, params));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points.size()));
}
BENCHMARK(BM_dbscan)->Arg(1024)->Arg(8192);

void BM_detect(benchmark::State& state) {
    PipelineConfig config;
    config.geometry = {346, 260};
    config.time_base = {0, 1000};
    SpeedBranchConfig branch;
    branch.band_index = 0;
    branch.threshold_speed = 200.0;
    branch.lif.beta = 0.93;
    branch.lif.u_thr = 0.75;
    config.branches.push_back(branch);
    config.dbscan = {8.0, 10};
    config.window_us = 15000;
    config.eval.interval_us = 100'000;
    const EventStream stream = busy_stream(1'000'000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect(stream, config));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stream.size()));
}
BENCHMARK(BM_detect);

}  // namespace

BENCHMARK_MAIN();
