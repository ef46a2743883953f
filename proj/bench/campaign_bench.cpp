// Campaign evaluation throughput: OpenMP-parallel episodes against the serial
// reference loop, on the bundled maps with baseline planners.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "w2l/harness.hpp"

namespace {

w2l::RunConfig campaign(const char* map, bool randomize, int episodes) {
  w2l::RunConfig cfg;
  cfg.map_path = std::string(W2L_MAP_DIR) + "/" + map + ".map";
  cfg.map = std::make_shared<const w2l::GridMap>(w2l::load_map_file(cfg.map_path));
  cfg.randomize = randomize;
  cfg.episodes = episodes;
  cfg.seed = 7;
  return cfg;
}

void BM_Campaign(benchmark::State& state, bool parallel, const char* map, bool randomize,
                 const char* planner) {
  const w2l::RunConfig cfg = campaign(map, randomize, static_cast<int>(state.range(0)));
  const auto prototype = w2l::make_planner(planner);
  for (auto _ : state) {
    const auto results = parallel ? w2l::run_campaign(cfg, *prototype)
                                  : w2l::run_campaign_serial(cfg, *prototype);
    benchmark::DoNotOptimize(results.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = parallel ? omp_get_max_threads() : 1;
}

}  // namespace

BENCHMARK_CAPTURE(BM_Campaign, tunnel12_static2_serial, false, "tunnel12", false, "static:2")
    ->Arg(200)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Campaign, tunnel12_static2_parallel, true, "tunnel12", false, "static:2")
    ->Arg(200)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Campaign, maze64a_threshold_serial, false, "maze64a", true, "threshold:0.2")
    ->Arg(50)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Campaign, maze64a_threshold_parallel, true, "maze64a", true, "threshold:0.2")
    ->Arg(50)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
