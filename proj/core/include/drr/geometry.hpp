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

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

#include "drr/volume.hpp"

namespace drr {

using Mat4 = Eigen::Matrix4d;

// Rigid pose of the CT volume inside the imaging system. Rotations are in
// degrees about the volume center, applied about the fixed axes x first,
// then y, then z (matrix Rz * Ry * Rx).
struct RigidPose {
  Vec3 translation = Vec3::Zero();  // mm
  Vec3 rotation_deg = Vec3::Zero();

  friend bool operator==(const RigidPose&, const RigidPose&) = default;
};

enum class View {
  kFront,    // beam along the volume y (anterior-posterior) axis
  kLateral,  // beam along the volume x axis
};

std::string_view to_string(View view);
View view_from_string(std::string_view name);

// Point source and flat detector. The isocenter is the center of the
// unposed volume; the beam axis passes through it and the detector center.
struct ImagingGeometry {
  double source_to_detector = 1800.0;  // mm
  double source_to_isocenter = 1400.0;  // mm
  std::int64_t rows = 256;
  std::int64_t cols = 256;
  double row_pitch = 1.6;  // mm
  double col_pitch = 1.6;  // mm
  View view = View::kFront;

  void validate() const;
  friend bool operator==(const ImagingGeometry&, const ImagingGeometry&) = default;
};

struct Ray {
  Vec3 origin;    // source
  Vec3 endpoint;  // detector pixel center
};

struct PoseRanges {
  double translation_bound = 100.0;  // mm, symmetric
  double rotation_bound = 45.0;      // degrees, symmetric

  void validate() const;
};

// World transform T * C * Rz * Ry * Rx * C^-1, where C translates to `center`.
Mat4 pose_matrix(const RigidPose& pose, const Vec3& center);

// Inverse of a rigid transform (transpose of the rotation block).
Mat4 rigid_inverse(const Mat4& transform);

// Source, detector center and in-plane unit axes in world coordinates.
struct DetectorFrame {
  Vec3 source;
  Vec3 detector_center;
  Vec3 beam_axis;
  Vec3 col_axis;  // increasing column index
  Vec3 row_axis;  // increasing row index (image "down")
};

DetectorFrame detector_frame(const ImagingGeometry& geometry, const Vec3& isocenter);

// Maps detector pixels to rays in continuous voxel-index coordinates of a
// posed volume. Construction does the matrix work once; operator() is cheap
// and safe to call from many threads.
class RayGenerator {
 public:
  RayGenerator(const ImagingGeometry& geometry, const RigidPose& pose,
               const VolumeGeometry& volume);
  RayGenerator(const ImagingGeometry& geometry, const Mat4& world_to_volume,
               const VolumeGeometry& volume);

  // Unchecked; row < rows and col < cols is the caller's job.
  Ray operator()(std::int64_t row, std::int64_t col) const {
    return {source_, first_pixel_ + static_cast<double>(row) * row_step_ +
                         static_cast<double>(col) * col_step_};
  }

  Ray world_ray(std::int64_t row, std::int64_t col) const;

 private:
  void init(const Mat4& world_to_volume, const VolumeGeometry& volume);

  ImagingGeometry geometry_;
  DetectorFrame frame_;
  Vec3 source_;
  Vec3 first_pixel_;
  Vec3 row_step_;
  Vec3 col_step_;
};

// Ray for one pixel in voxel-index space. Throws kIndexOutOfRange.
Ray make_ray(const ImagingGeometry& geometry, const RigidPose& pose,
             const VolumeGeometry& volume, std::int64_t row, std::int64_t col);
Ray make_ray(const ImagingGeometry& geometry, const RigidPose& pose, const CtVolume& volume,
             std::int64_t row, std::int64_t col);

// Each of the six components drawn uniformly and independently from
// [-bound, bound], in the order tx, ty, tz, rx, ry, rz. Bitwise reproducible
// for a given engine state (does not use std distributions).
RigidPose sample_pose(std::mt19937_64& rng, const PoseRanges& ranges);
RigidPose sample_pose(std::uint64_t seed, const PoseRanges& ranges);

}  // namespace drr
