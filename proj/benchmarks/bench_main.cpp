#include <benchmark/benchmark.h>

#include <vector>

#include "thcsim/config.hpp"
#include "thcsim/geometry.hpp"
#include "thcsim/metrics.hpp"
#include "thcsim/pic.hpp"
#include "thcsim/rng.hpp"
#include "thcsim/sim.hpp"
#include "thcsim/tasks.hpp"
#include "thcsim/thc.hpp"

using namespace thcsim;

namespace {

void BM_LosGeometry(benchmark::State& state) {
  const Obstacle obs{{5, 1.5, 0.2}, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(los_geometry(Vec3::Zero(), {10, 0, 0}, obs, 0.5236, 0.5));
  }
}
BENCHMARK(BM_LosGeometry);

void BM_Occludes(benchmark::State& state) {
  const ViewCone cone{Vec3::Zero(), {10, 0, 0}, 0.5236};
  const Obstacle obs{{5, 2.5, 0.2}, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(occludes(cone, obs));
}
BENCHMARK(BM_Occludes);

void BM_IntersectionVolume(benchmark::State& state) {
  const ViewCone cone{Vec3::Zero(), {10, 0, 0}, 0.5236};
  const Obstacle obs{{5, 1.0, 0.0}, 1.0};
  const double resolution = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fov_obstacle_intersection_volume(cone, obs, resolution));
  }
}
BENCHMARK(BM_IntersectionVolume)->Arg(20)->Arg(50)->Arg(100);

void BM_Compose(benchmark::State& state) {
  const SimParams params;
  const std::vector<Obstacle> obstacles{{{3, 0.5, 0}, 1.0}};
  UavState aux;
  aux.position = {1.2, 0, 0};
  UavState main;
  main.position = {6, 0, 0};
  const std::vector<Vec3> others{main.position};
  LosControllerState los;
  for (auto _ : state) {
    PriorityStack stack;
    stack.push(task1_collision(aux, obstacles, others, params));
    stack.push(task2_distance(aux, main, params.viewpoint_distance, params));
    stack.push(task3_los(aux, main, obstacles, params, los));
    stack.push(task4_goto(aux, {0, 3, 0}, Vec3(0.5, 0.5, 0), params.accel_limit));
    benchmark::DoNotOptimize(compose(stack, params.dls_damping, params.accel_limit));
  }
}
BENCHMARK(BM_Compose);

void BM_PicStep(benchmark::State& state) {
  const SimParams sim;
  PicParams params = sim.gains.pic;
  params.samples = static_cast<int>(state.range(0));
  const RolloutModel model = rollout_model(sim);
  const std::vector<Obstacle> obstacles{{{2, 1, 0}, 0.8}, {{-1, 3, 1}, 1.2}};
  const std::vector<Vec3> nominal(static_cast<std::size_t>(params.horizon), Vec3::Zero());
  const UavState start;
  std::uint64_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pic_step(start, nominal, {4, 4, 0}, obstacles, params, model, derive_key(1, k++, 0)));
  }
  state.SetItemsProcessed(state.iterations() * params.samples);
}
BENCHMARK(BM_PicStep)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_FullRun(benchmark::State& state) {
  ScenarioConfig cfg = builtin_scenario(static_cast<int>(state.range(0)));
  cfg.ablation.controller = state.range(1) ? GoalController::kPic : GoalController::kPid;
  for (auto _ : state) {
    const SimHistory h = run(cfg);
    benchmark::DoNotOptimize(occlusion_time_pct(h));
  }
}
BENCHMARK(BM_FullRun)
    ->ArgsProduct({{1, 2, 5}, {0, 1}})
    ->ArgNames({"scenario", "pic"})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
