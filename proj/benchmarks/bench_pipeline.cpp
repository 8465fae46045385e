#include <benchmark/benchmark.h>

#include "pcfill/pipeline.h"
#include "pcfill/rng.h"

namespace {

using namespace pcfill;

PointCloud make_cloud(int n, std::uint64_t seed, double extent) {
  Rng rng(seed);
  PointCloud c(n);
  for (auto& p : c) {
    p = {rng.uniform(-extent, extent), rng.uniform(-extent, extent),
         rng.uniform(-extent, extent)};
  }
  return c;
}

void BM_CompleteTiny(benchmark::State& state) {
  Profile p = Profile::preset("tiny-test");
  const auto w = init_weights(p);
  const auto cloud = make_cloud(p.n_input, 1, 0.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(complete_cloud(cloud, p, w));
  }
}
BENCHMARK(BM_CompleteTiny)->Unit(benchmark::kMillisecond);

void BM_ProjectDepth(benchmark::State& state) {
  const auto cloud = make_cloud(2048, 2, 0.5);
  ProjectionParams params;
  params.resolution = 224;
  params.camera_distance = 0.7;
  const Viewpoint vp{{0, 0, 0.7}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_depth(cloud, vp, params));
  }
}
BENCHMARK(BM_ProjectDepth)->Unit(benchmark::kMillisecond);

void BM_EncodePartial(benchmark::State& state) {
  Profile p = Profile::preset("pcn");
  p.channels = 48;
  p.point_feat = 32;
  p.sdg_dims = {64, 48};
  const auto w = init_weights(p);
  const auto cloud = make_cloud(2048, 3, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_partial(cloud, p, w));
  }
}
BENCHMARK(BM_EncodePartial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
