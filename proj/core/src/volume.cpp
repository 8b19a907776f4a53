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

#include "drr/volume.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "drr/error.hpp"

namespace drr {

Vec3 VolumeGeometry::extent() const {
  return Vec3(static_cast<double>(dims.x), static_cast<double>(dims.y),
              static_cast<double>(dims.z))
      .cwiseProduct(spacing);
}

Vec3 VolumeGeometry::center() const { return origin + 0.5 * extent(); }

Vec3 VolumeGeometry::index_to_world(const Vec3& index) const {
  return origin + index.cwiseProduct(spacing);
}

Vec3 VolumeGeometry::world_to_index(const Vec3& world) const {
  return (world - origin).cwiseQuotient(spacing);
}

void VolumeGeometry::validate() const {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
    std::ostringstream msg;
    msg << "volume dims must be >= 1, got (" << dims.x << ", " << dims.y << ", "
        << dims.z << ")";
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
  for (int a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      fail(ErrorCode::kInvalidArgument, "voxel spacing must be finite and > 0");
    }
    if (!std::isfinite(origin[a])) {
      fail(ErrorCode::kInvalidArgument, "volume origin must be finite");
    }
  }
}

CtVolume::CtVolume(VolumeGeometry geometry, std::vector<float> hu)
    : geometry_(std::move(geometry)), values_(std::move(hu)) {
  geometry_.validate();
  if (static_cast<std::int64_t>(values_.size()) != geometry_.dims.count()) {
    fail(ErrorCode::kDimMismatch, "CT value count " + std::to_string(values_.size()) +
                                      " does not match dims product " +
                                      std::to_string(geometry_.dims.count()));
  }
  for (float v : values_) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteValue, "CT volume holds a non-finite value");
  }
}

std::pair<float, float> CtVolume::minmax() const {
  auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  return {*lo, *hi};
}

LabelVolume::LabelVolume(VolumeGeometry geometry, std::vector<std::uint8_t> categories)
    : geometry_(std::move(geometry)), categories_(std::move(categories)) {
  geometry_.validate();
  if (static_cast<std::int64_t>(categories_.size()) != geometry_.dims.count()) {
    fail(ErrorCode::kDimMismatch, "label count " + std::to_string(categories_.size()) +
                                      " does not match dims product " +
                                      std::to_string(geometry_.dims.count()));
  }
  for (std::uint8_t c : categories_) {
    if (c >= kCategoryCount) {
      fail(ErrorCode::kUnknownLabelCode,
           "label category " + std::to_string(c) + " outside {0, 1, 2}");
    }
  }
}

std::array<std::int64_t, kCategoryCount> LabelVolume::category_counts() const {
  std::array<std::int64_t, kCategoryCount> counts{};
  for (std::uint8_t c : categories_) ++counts[c];
  return counts;
}

bool same_spacing(const Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(a[i] - b[i]) > 1e-6 * std::max(std::abs(a[i]), std::abs(b[i]))) return false;
  }
  return true;
}

void require_paired(const CtVolume& ct, const LabelVolume& labels) {
  if (ct.dims() != labels.dims() || !same_spacing(ct.spacing(), labels.geometry().spacing)) {
    std::ostringstream msg;
    msg << "label geometry (" << labels.dims().x << "x" << labels.dims().y << "x"
        << labels.dims().z << ") does not match CT (" << ct.dims().x << "x" << ct.dims().y
        << "x" << ct.dims().z << ") or spacing differs";
    fail(ErrorCode::kGeometryMismatch, msg.str());
  }
}

std::string_view to_string(IntensityMode mode) {
  return mode == IntensityMode::kRawHu ? "raw" : "attenuation";
}

IntensityMode intensity_mode_from_string(std::string_view name) {
  if (name == "raw" || name == "raw_hu") return IntensityMode::kRawHu;
  if (name == "attenuation") return IntensityMode::kAttenuation;
  fail(ErrorCode::kInvalidArgument, "unknown intensity mode '" + std::string(name) + "'");
}

double hu_to_intensity(double hu, IntensityMode mode) {
  if (!std::isfinite(hu)) fail(ErrorCode::kNonFiniteValue, "HU value is not finite");
  if (mode == IntensityMode::kRawHu) return hu;
  return std::max(0.0, (hu + 1000.0) / 1000.0);
}

}  // namespace drr
