// Copyright 2026 The drr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "drr/analysis.hpp"
#include "drr/projector.hpp"
#include "drr/traversal.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace drr;

const testing::LungPhantom& phantom(std::int64_t n) {
  static std::map<std::int64_t, testing::LungPhantom> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, testing::lung_phantom(n)).first;
  return it->second;
}

// Full 256x256 render; args are volume edge and thread count.
void BM_Render(benchmark::State& state) {
  const auto& p = phantom(state.range(0));
  ImagingGeometry geom;
  RenderOptions opt;
  opt.weights = {1, 1, 3};
  opt.thresholds = {0.0, 0.2};
  opt.threads = static_cast<unsigned>(state.range(1));
  RigidPose pose;
  pose.rotation_deg = Vec3(3, -4, 5);
  for (auto _ : state) {
    DrrImage img = render(p.ct, p.labels, pose, geom, opt);
    benchmark::DoNotOptimize(img.intensity.data());
  }
  state.SetItemsProcessed(state.iterations() * geom.rows * geom.cols);
}
BENCHMARK(BM_Render)
    ->Args({128, 1})
    ->Args({256, 1})
    ->Args({256, 8})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_RenderRpl(benchmark::State& state) {
  const auto& p = phantom(256);
  ImagingGeometry geom;
  for (auto _ : state) {
    RplImage img = render_rpl(p.ct, RigidPose{}, geom, IntensityMode::kAttenuation, 1);
    benchmark::DoNotOptimize(img.path_integral.data());
  }
}
BENCHMARK(BM_RenderRpl)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_WalkRay(benchmark::State& state) {
  const Dims dims{256, 256, 256};
  const Vec3 spacing = Vec3::Ones();
  std::mt19937_64 rng(1);
  std::vector<Ray> rays;
  for (int n = 0; n < 1024; ++n) rays.push_back(testing::random_crossing_ray(rng, dims));
  std::size_t n = 0;
  std::int64_t steps = 0;
  for (auto _ : state) {
    double total = 0.0;
    walk_ray(rays[n++ % rays.size()], dims, spacing,
             [&](std::size_t, std::int64_t, std::int64_t, std::int64_t, double mm) {
               total += mm;
               ++steps;
             });
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(BM_WalkRay);

void BM_CrivHistogram(benchmark::State& state) {
  const auto& p = phantom(128);
  ImagingGeometry geom;
  geom.rows = 128;
  geom.cols = 128;
  geom.row_pitch = 3.2;
  geom.col_pitch = 3.2;
  const std::vector<RigidPose> poses(4);
  for (auto _ : state) {
    CrivHistogram h = criv_histogram(p.ct, p.labels, poses, geom, {1, 1, 3}, 50);
    benchmark::DoNotOptimize(h.counts.data());
  }
}
BENCHMARK(BM_CrivHistogram)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
