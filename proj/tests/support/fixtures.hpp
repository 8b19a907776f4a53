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

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "drr/geometry.hpp"
#include "drr/volume.hpp"

namespace drr::testing {

// Removes itself on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("drr_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline VolumeGeometry cube_geometry(std::int64_t nx, std::int64_t ny, std::int64_t nz,
                                    Vec3 spacing = Vec3::Ones(), Vec3 origin = Vec3::Zero()) {
  VolumeGeometry g;
  g.dims = {nx, ny, nz};
  g.spacing = spacing;
  g.origin = origin;
  return g;
}

inline CtVolume constant_ct(const VolumeGeometry& g, float hu) {
  return CtVolume(g, std::vector<float>(static_cast<std::size_t>(g.dims.count()), hu));
}

inline LabelVolume constant_labels(const VolumeGeometry& g, std::uint8_t category) {
  return LabelVolume(g, std::vector<std::uint8_t>(static_cast<std::size_t>(g.dims.count()), category));
}

inline CtVolume random_ct(const VolumeGeometry& g, std::mt19937_64& rng, float lo, float hi) {
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> v(static_cast<std::size_t>(g.dims.count()));
  for (float& x : v) x = dist(rng);
  return CtVolume(g, std::move(v));
}

inline LabelVolume random_labels(const VolumeGeometry& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, 2);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(g.dims.count()));
  for (auto& x : v) x = static_cast<std::uint8_t>(dist(rng));
  return LabelVolume(g, std::move(v));
}

// Chest-like phantom: air outside a soft-tissue body, two lung ellipsoids,
// and an infected region filling the lower half of the left lung.
struct LungPhantom {
  CtVolume ct;
  LabelVolume labels;
};

inline LungPhantom lung_phantom(std::int64_t n, double spacing_mm = 1.0) {
  const VolumeGeometry g = cube_geometry(n, n, n, Vec3::Constant(spacing_mm));
  std::vector<float> hu(static_cast<std::size_t>(g.dims.count()), -1000.0f);
  std::vector<std::uint8_t> cat(hu.size(), 0);
  const double c = 0.5 * static_cast<double>(n);
  for (std::int64_t k = 0; k < n; ++k) {
    for (std::int64_t j = 0; j < n; ++j) {
      for (std::int64_t i = 0; i < n; ++i) {
        const double x = (i + 0.5 - c) / c;
        const double y = (j + 0.5 - c) / c;
        const double z = (k + 0.5 - c) / c;
        const std::size_t at = g.linear_index(i, j, k);
        if (x * x / 0.8 + y * y / 0.5 <= 1.0 && std::abs(z) < 0.9) hu[at] = 40.0f;
        for (double cx : {-0.4, 0.4}) {
          const double dx = (x - cx) / 0.3;
          const double dy = y / 0.4;
          const double dz = z / 0.7;
          if (dx * dx + dy * dy + dz * dz <= 1.0) {
            const bool infected = cx < 0.0 && z < 0.0;
            hu[at] = infected ? -500.0f : -850.0f;
            cat[at] = infected ? 2 : 1;
          }
        }
      }
    }
  }
  return {CtVolume(g, std::move(hu)), LabelVolume(g, std::move(cat))};
}

// Exactly 10 infection voxels and 90 lung voxels inside a 10x10x10 volume.
inline LabelVolume ten_percent_labels() {
  const VolumeGeometry g = cube_geometry(10, 10, 10);
  std::vector<std::uint8_t> cat(1000, 0);
  for (int n = 0; n < 100; ++n) cat[static_cast<std::size_t>(n)] = n < 10 ? 2 : 1;
  return LabelVolume(g, std::move(cat));
}

// ---- Dense-sampling oracle --------------------------------------------------
// Midpoint samples along the whole ray, each classified by floor() into a
// voxel. Deliberately shares no code with walk_ray.

using VoxelKey = std::array<std::int64_t, 3>;

inline std::map<VoxelKey, double> sampled_lengths(const Ray& ray, const Dims& dims,
                                                  const Vec3& spacing, std::int64_t samples) {
  std::map<VoxelKey, double> lengths;
  const Vec3 d = ray.endpoint - ray.origin;
  const double total_mm = std::sqrt(std::pow(d.x() * spacing.x(), 2) +
                                    std::pow(d.y() * spacing.y(), 2) +
                                    std::pow(d.z() * spacing.z(), 2));
  const double step_mm = total_mm / static_cast<double>(samples);
  for (std::int64_t s = 0; s < samples; ++s) {
    const double t = (static_cast<double>(s) + 0.5) / static_cast<double>(samples);
    const Vec3 p = ray.origin + t * d;
    VoxelKey key{static_cast<std::int64_t>(std::floor(p.x())),
                 static_cast<std::int64_t>(std::floor(p.y())),
                 static_cast<std::int64_t>(std::floor(p.z()))};
    if (key[0] < 0 || key[1] < 0 || key[2] < 0 || key[0] >= dims.x || key[1] >= dims.y ||
        key[2] >= dims.z) {
      continue;
    }
    lengths[key] += step_mm;
  }
  return lengths;
}

inline double sampled_rpl(const Ray& ray, const CtVolume& ct, std::int64_t samples,
                          const std::function<double(float)>& rho) {
  double sum = 0.0;
  for (const auto& [key, length] : sampled_lengths(ray, ct.dims(), ct.spacing(), samples)) {
    sum += length * rho(ct.at(key[0], key[1], key[2]));
  }
  return sum;
}

// A random ray that starts and ends well outside an n-cube but passes
// through a random interior point.
inline Ray random_crossing_ray(std::mt19937_64& rng, const Dims& dims) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vec3 extent(static_cast<double>(dims.x), static_cast<double>(dims.y),
                    static_cast<double>(dims.z));
  const Vec3 inside(unit(rng) * extent.x(), unit(rng) * extent.y(), unit(rng) * extent.z());
  Vec3 dir(normal(rng), normal(rng), normal(rng));
  dir.normalize();
  const double reach = 2.0 * extent.norm();
  return {inside - reach * dir, inside + reach * dir};
}

}  // namespace drr::testing
