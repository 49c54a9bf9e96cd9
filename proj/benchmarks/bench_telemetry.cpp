#include <benchmark/benchmark.h>

#include <vector>

#include "bridgesim/rng.hpp"
#include "bridgesim/scenario.hpp"
#include "bridgesim/telemetry.hpp"

using namespace bridgesim;

namespace {

const ScenarioSpec& scenario() {
  static const ScenarioSpec sc = [] {
    const ScenarioSpec s = load_scenario_file(BRIDGESIM_FIXTURE_DIR "/two_bridge.json");
    return with_defects_for_seed(s, s.seed);
  }();
  return sc;
}

std::vector<Vec3> probe_points(std::size_t n) {
  Rng rng(1);
  std::vector<Vec3> pts;
  const auto& tasks = scenario().tasks;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = tasks[i % tasks.size()];
    const Vec3 ref = t.reference_points[i % t.reference_points.size()];
    pts.push_back(ref + Vec3{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-2, 2)});
  }
  return pts;
}

void BM_OnPath(benchmark::State& state) {
  const auto pts = probe_points(1024);
  const TaskSpec& task = scenario().tasks.front();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(on_path(task, pts[i++ & 1023]));
  }
}
BENCHMARK(BM_OnPath);

void BM_AssignTask(benchmark::State& state) {
  const auto pts = probe_points(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(assign_task(scenario().tasks, pts[i++ & 1023]));
  }
}
BENCHMARK(BM_AssignTask);

std::vector<FrameRecord> synthetic_frames(std::size_t n) {
  const auto pts = probe_points(n);
  Rng rng(2);
  std::vector<FrameRecord> frames;
  for (std::size_t i = 0; i < n; ++i) {
    FrameRecord f;
    f.index = static_cast<std::int64_t>(i);
    f.position = pts[i];
    f.speed_mps = rng.uniform(0, 6);
    f.battery_pct = 80.0;
    f.collision.min_clearance_m = 10.0;
    f.input.snapshot = rng.uniform() < 0.01;
    frames.push_back(f);
  }
  return frames;
}

void BM_PipelineStream(benchmark::State& state) {
  const auto frames = synthetic_frames(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    TelemetryPipeline p(scenario());
    for (const auto& f : frames) benchmark::DoNotOptimize(p.process(f));
    benchmark::DoNotOptimize(p.finalize());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PipelineStream)->Arg(1000)->Arg(10000);

void BM_AnalyzeBatch(benchmark::State& state) {
  const auto frames = synthetic_frames(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analyze_frames(frames, scenario()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AnalyzeBatch)->Arg(1000)->Arg(10000);

}  // namespace
