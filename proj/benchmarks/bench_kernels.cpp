#include <benchmark/benchmark.h>

#include "pcfill/geometry.h"
#include "pcfill/metrics.h"
#include "pcfill/rng.h"

namespace {

using namespace pcfill;

PointCloud make_cloud(int n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud c(n);
  for (auto& p : c) {
    p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  }
  return c;
}

void BM_Knn(benchmark::State& state) {
  const auto ref = make_cloud(static_cast<int>(state.range(0)), 1);
  const auto query = make_cloud(512, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(knn(query, ref, 16));
  }
}
BENCHMARK(BM_Knn)->Arg(2048)->Arg(8192);

void BM_Fps(benchmark::State& state) {
  const auto cloud = make_cloud(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fps(cloud, 512));
  }
}
BENCHMARK(BM_Fps)->Arg(2048)->Arg(8192);

void BM_Chamfer(benchmark::State& state) {
  const auto x = make_cloud(static_cast<int>(state.range(0)), 4);
  const auto y = make_cloud(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chamfer(x, y, ChamferVariant::L2Squared));
  }
}
BENCHMARK(BM_Chamfer)->Arg(2048)->Arg(8192);

void BM_ViewpointCrop(benchmark::State& state) {
  const auto gt = make_cloud(8192, 6);
  const auto vp = fixed_test_viewpoints()[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(viewpoint_crop(gt, vp, 4096, 2048));
  }
}
BENCHMARK(BM_ViewpointCrop);

void BM_ChamferGrad(benchmark::State& state) {
  const auto x = make_cloud(1024, 7);
  const auto y = make_cloud(1024, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chamfer_grad(x, y, ChamferVariant::L2Squared));
  }
}
BENCHMARK(BM_ChamferGrad);

}  // namespace
