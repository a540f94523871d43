#include <benchmark/benchmark.h>

#include <vector>

#include "splitplace/decider.hpp"
#include "splitplace/engine.hpp"
#include "splitplace/runner.hpp"
#include "splitplace/schedulers.hpp"
#include "splitplace/trace.hpp"

using namespace splitplace;

static void BM_UcbSelect(benchmark::State& state) {
  BanditState b;
  b.at(Context::Tight, SplitDecision::Layer) = {120, 0.41};
  b.at(Context::Tight, SplitDecision::Semantic) = {380, 0.88};
  b.total_pulls[0] = 500;
  for (auto _ : state) benchmark::DoNotOptimize(select_arm(b, Context::Tight));
}
BENCHMARK(BM_UcbSelect);

static void BM_Place(benchmark::State& state) {
  const auto profiles = default_profiles();
  const auto g = instantiate(SplitDecision::Semantic, profiles.front());
  Simulator sim(default_cluster(), 0);
  const auto view = sim.view();
  auto sched = make_scheduler(kSchedulerNames[state.range(0)], 0);
  for (auto _ : state) benchmark::DoNotOptimize(sched->place(g, view));
  state.SetLabel(std::string(sched->name()));
}
BENCHMARK(BM_Place)->DenseRange(0, 2);

// One interval of engine time with `range(0)` resident workloads.
static void BM_EngineStep(benchmark::State& state) {
  const auto profiles = default_profiles();
  const auto cluster = default_cluster();
  for (auto _ : state) {
    state.PauseTiming();
    Simulator sim(cluster, 1);
    LeastLoadedScheduler sched;
    for (WorkloadId id = 0; id < static_cast<WorkloadId>(state.range(0)); ++id) {
      const auto& p = profiles[id % profiles.size()];
      const auto g = instantiate(id % 2 ? SplitDecision::Layer : SplitDecision::Semantic, p);
      const auto placement = sched.place(g, sim.view());
      if (!placement.queued()) sim.admit(Workload{id, 0, p.name, 10}, SplitDecision::Layer, 0.9, g, *placement.hosts);
    }
    state.ResumeTiming();
    sim.step(cluster.interval_s);
  }
}
BENCHMARK(BM_EngineStep)->Arg(4)->Arg(16)->Arg(32);

static void BM_Simulate(benchmark::State& state) {
  const auto profiles = default_profiles();
  const auto cluster = default_cluster();
  TraceSpec spec;
  spec.horizon_s = 500;
  spec.lambda_per_interval = 0.2;
  spec.app_mix = {{"inceptionv3", 0.25}, {"mobilenetv2", 0.25}, {"resnet50v2", 0.5}};
  spec.sla_multiplier_min = 0.5;
  spec.sla_multiplier_max = 2.0;
  const auto trace = generate_trace(spec, profiles, cluster.interval_s, 0);
  SimulationOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(cluster, profiles, trace, opt, 0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
