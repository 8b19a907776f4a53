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

#include "drr/traversal.hpp"

#include <algorithm>

namespace drr {

std::optional<RayClip> clip_ray(const Ray& ray, const Dims& dims) {
  const Vec3 delta = ray.endpoint - ray.origin;
  double enter = 0.0;
  double exit = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double extent = static_cast<double>(dims[a]);
    const double p = ray.origin[a];
    const double d = delta[a];
    if (d == 0.0) {
      if (!(p >= 0.0 && p < extent)) return std::nullopt;
      continue;
    }
    double t0 = (0.0 - p) / d;
    double t1 = (extent - p) / d;
    if (t0 > t1) std::swap(t0, t1);
    enter = std::max(enter, t0);
    exit = std::min(exit, t1);
  }
  if (!(enter < exit)) return std::nullopt;
  return RayClip{enter, exit};
}

double chord_length(const Ray& ray, const Dims& dims, const Vec3& spacing) {
  const auto clip = clip_ray(ray, dims);
  if (!clip) return 0.0;
  return (clip->exit - clip->enter) * index_length_mm(ray.endpoint - ray.origin, spacing);
}

std::vector<TraversalSegment> traverse(const Ray& ray, const Dims& dims, const Vec3& spacing) {
  std::vector<TraversalSegment> segments;
  walk_ray(ray, dims, spacing,
           [&](std::size_t, std::int64_t i, std::int64_t j, std::int64_t k, double length) {
             segments.push_back({{i, j, k}, length});
           });
  return segments;
}

}  // namespace drr
