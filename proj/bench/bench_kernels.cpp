// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS /
// APL_THREADS.

#include <benchmark/benchmark.h>

#include "apl/env.hpp"
#include "apl/kernels.hpp"

namespace {

using namespace apl;

struct Fixture {
  World world;
  ObjectModel model = make_model(ModelKind::kCup, 1000, 7);
  NeighborIndex index{model.cloud};
  Scene scene = generate_scene(model, 18, default_bin_extent(model), 31);
  Rendering rendering = render(scene, world.grid, 45, world.intrinsics);
  std::vector<Hypothesis> hyps = [this] {
    Rng rng(1);
    return estimate(rendering, scene, world.grid, 45, NoiseModel{}, rng);
  }();
};

const Fixture &fixture() {
  static const Fixture f;
  return f;
}

void BM_ScoreSerial(benchmark::State &state) {
  const Fixture &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::score_hypotheses_serial(f.hyps, f.rendering, f.index, 5.0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.hyps.size()));
}

void BM_ScoreParallel(benchmark::State &state) {
  const Fixture &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::score_hypotheses_parallel(f.hyps, f.rendering, f.index, 5.0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.hyps.size()));
}

void BM_VisibilitySerial(benchmark::State &state) {
  const Fixture &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::visibility_profile_serial(f.scene, f.world.grid, f.world.intrinsics));
  }
}

void BM_VisibilityParallel(benchmark::State &state) {
  const Fixture &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::visibility_profile_parallel(f.scene, f.world.grid, f.world.intrinsics));
  }
}

void BM_EntropySerial(benchmark::State &state) {
  const Fixture &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::view_entropy_serial(f.scene, f.world.grid, f.world.intrinsics));
  }
}

void BM_EntropyParallel(benchmark::State &state) {
  const Fixture &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::view_entropy_parallel(f.scene, f.world.grid, f.world.intrinsics));
  }
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ScoreParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_VisibilitySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VisibilityParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EntropySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EntropyParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
