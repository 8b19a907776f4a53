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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "drr/geometry.hpp"
#include "drr/volume.hpp"

namespace drr {

// One voxel's share of a ray: the voxel index and the length (mm) the ray
// travels inside it. Zero-length pieces are never produced.
struct TraversalSegment {
  std::array<std::int64_t, 3> voxel;
  double raw_length;
};

// Parametric interval [enter, exit] (ray parameter, 0 at origin, 1 at
// endpoint) where the ray lies inside the box [0, n) on every axis.
struct RayClip {
  double enter;
  double exit;
};

// Clips `ray` (voxel-index coordinates) against the grid. An axis the ray
// runs parallel to uses half-open membership [0, n).
std::optional<RayClip> clip_ray(const Ray& ray, const Dims& dims);

// Length in mm of a voxel-index space direction.
inline double index_length_mm(const Vec3& delta, const Vec3& spacing) {
  return delta.cwiseProduct(spacing).norm();
}

// Entry-to-exit chord length in mm (0 on a miss).
double chord_length(const Ray& ray, const Dims& dims, const Vec3& spacing);

// Exact radiological-path decomposition with incremental (Jacobs-style)
// index stepping over merged plane crossings. Calls
//   visit(linear_index, i, j, k, length_mm)
// for each voxel piece in order from the ray origin. Pieces with zero length
// (coincident plane crossings) are skipped.
template <typename Visitor>
void walk_ray(const Ray& ray, const Dims& dims, const Vec3& spacing, Visitor&& visit) {
  const auto clip = clip_ray(ray, dims);
  if (!clip) return;
  const Vec3 delta = ray.endpoint - ray.origin;
  const double length_mm = index_length_mm(delta, spacing);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::array<std::int64_t, 3> n = {dims.x, dims.y, dims.z};
  const std::array<std::int64_t, 3> stride = {1, dims.x, dims.x * dims.y};
  std::array<std::int64_t, 3> idx{};
  std::array<std::int64_t, 3> step{};
  std::array<double, 3> next{};
  std::array<double, 3> inc{};

  for (int a = 0; a < 3; ++a) {
    const double d = delta[a];
    const double p = ray.origin[a] + clip->enter * d;
    std::int64_t v;
    if (d > 0.0) {
      v = static_cast<std::int64_t>(std::floor(p));
    } else if (d < 0.0) {
      v = static_cast<std::int64_t>(std::ceil(p)) - 1;
    } else {
      v = static_cast<std::int64_t>(std::floor(ray.origin[a]));
    }
    v = std::clamp<std::int64_t>(v, 0, n[a] - 1);
    idx[a] = v;
    if (d > 0.0) {
      step[a] = 1;
      inc[a] = 1.0 / d;
      next[a] = (static_cast<double>(v + 1) - ray.origin[a]) / d;
    } else if (d < 0.0) {
      step[a] = -1;
      inc[a] = -1.0 / d;
      next[a] = (static_cast<double>(v) - ray.origin[a]) / d;
    } else {
      step[a] = 0;
      inc[a] = kInf;
      next[a] = kInf;
    }
  }

  std::int64_t linear = idx[0] + stride[1] * idx[1] + stride[2] * idx[2];
  double current = clip->enter;
  const double exit = clip->exit;
  for (;;) {
    const int axis = next[0] <= next[1] ? (next[0] <= next[2] ? 0 : 2)
                                        : (next[1] <= next[2] ? 1 : 2);
    const double end = std::min(next[axis], exit);
    if (end > current) {
      visit(static_cast<std::size_t>(linear), idx[0], idx[1], idx[2],
            (end - current) * length_mm);
      current = end;
    }
    if (next[axis] >= exit) break;
    idx[axis] += step[axis];
    if (idx[axis] < 0 || idx[axis] >= n[axis]) break;
    linear += step[axis] * stride[axis];
    next[axis] += inc[axis];
  }
}

std::vector<TraversalSegment> traverse(const Ray& ray, const Dims& dims, const Vec3& spacing);

}  // namespace drr
