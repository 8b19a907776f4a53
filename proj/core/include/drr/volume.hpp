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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace drr {

using Vec3 = Eigen::Vector3d;

// Voxel counts along x, y, z.
struct Dims {
  std::int64_t x = 1;
  std::int64_t y = 1;
  std::int64_t z = 1;

  std::int64_t count() const { return x * y * z; }
  std::int64_t operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

// Grid layout shared by CT and label volumes. Voxel (i, j, k) covers the
// continuous index box [i, i+1) x [j, j+1) x [k, k+1); `origin` is the world
// position of the low corner of voxel (0, 0, 0).
struct VolumeGeometry {
  Dims dims;
  Vec3 spacing = Vec3::Ones();  // mm per voxel
  Vec3 origin = Vec3::Zero();   // mm

  // Storage is x-fastest.
  std::size_t linear_index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return static_cast<std::size_t>(i + dims.x * (j + dims.y * k));
  }
  Vec3 extent() const;
  Vec3 center() const;
  Vec3 index_to_world(const Vec3& index) const;
  Vec3 world_to_index(const Vec3& world) const;

  // Throws kInvalidArgument unless dims >= 1 and spacing > 0 (all finite).
  void validate() const;
};

enum class Category : std::uint8_t { kBackground = 0, kLung = 1, kInfection = 2 };
inline constexpr int kCategoryCount = 3;

// CT intensities in HU. Immutable once constructed.
class CtVolume {
 public:
  CtVolume(VolumeGeometry geometry, std::vector<float> hu);

  const VolumeGeometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims; }
  const Vec3& spacing() const { return geometry_.spacing; }
  const Vec3& origin() const { return geometry_.origin; }
  std::span<const float> values() const { return values_; }

  float at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return values_[geometry_.linear_index(i, j, k)];
  }
  std::pair<float, float> minmax() const;

 private:
  VolumeGeometry geometry_;
  std::vector<float> values_;
};

// Per-voxel category m in {0, 1, 2}. Immutable once constructed.
class LabelVolume {
 public:
  LabelVolume(VolumeGeometry geometry, std::vector<std::uint8_t> categories);

  const VolumeGeometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims; }
  std::span<const std::uint8_t> categories() const { return categories_; }

  std::uint8_t at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return categories_[geometry_.linear_index(i, j, k)];
  }
  std::array<std::int64_t, kCategoryCount> category_counts() const;

 private:
  VolumeGeometry geometry_;
  std::vector<std::uint8_t> categories_;
};

// Spacing equality up to single precision, since NIfTI headers store
// float32 and a volume may be paired with one saved in another format.
bool same_spacing(const Vec3& a, const Vec3& b);

// Throws kGeometryMismatch unless dims agree and spacing matches per same_spacing.
void require_paired(const CtVolume& ct, const LabelVolume& labels);

enum class IntensityMode {
  kRawHu,        // HU as-is
  kAttenuation,  // max(0, (HU + 1000) / 1000)
};

std::string_view to_string(IntensityMode mode);
IntensityMode intensity_mode_from_string(std::string_view name);

// Throws kNonFiniteValue for NaN or infinite input.
double hu_to_intensity(double hu, IntensityMode mode);

}  // namespace drr
