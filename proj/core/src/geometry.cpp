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

#include "drr/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "drr/error.hpp"

namespace drr {
namespace {

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

// Uniform on [0, 1) from the top 53 bits.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double symmetric_uniform(std::mt19937_64& rng, double bound) {
  return bound * (2.0 * unit_uniform(rng) - 1.0);
}

}  // namespace

std::string_view to_string(View view) { return view == View::kFront ? "front" : "lateral"; }

View view_from_string(std::string_view name) {
  if (name == "front") return View::kFront;
  if (name == "lateral") return View::kLateral;
  fail(ErrorCode::kInvalidArgument, "unknown view '" + std::string(name) + "'");
}

void ImagingGeometry::validate() const {
  if (!(source_to_isocenter > 0.0) || !(source_to_detector > source_to_isocenter) ||
      !std::isfinite(source_to_detector)) {
    fail(ErrorCode::kInvalidArgument,
         "imaging geometry needs 0 < source_to_isocenter < source_to_detector");
  }
  if (rows < 1 || cols < 1) fail(ErrorCode::kInvalidArgument, "detector needs rows, cols >= 1");
  if (!(row_pitch > 0.0) || !(col_pitch > 0.0) || !std::isfinite(row_pitch) ||
      !std::isfinite(col_pitch)) {
    fail(ErrorCode::kInvalidArgument, "pixel pitch must be finite and > 0");
  }
}

void PoseRanges::validate() const {
  if (!(translation_bound >= 0.0) || !(rotation_bound >= 0.0) ||
      !std::isfinite(translation_bound) || !std::isfinite(rotation_bound)) {
    fail(ErrorCode::kInvalidArgument, "pose bounds must be finite and >= 0");
  }
}

Mat4 pose_matrix(const RigidPose& pose, const Vec3& center) {
  const Eigen::Matrix3d rotation =
      (Eigen::AngleAxisd(radians(pose.rotation_deg.z()), Vec3::UnitZ()) *
       Eigen::AngleAxisd(radians(pose.rotation_deg.y()), Vec3::UnitY()) *
       Eigen::AngleAxisd(radians(pose.rotation_deg.x()), Vec3::UnitX()))
          .toRotationMatrix();
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = pose.translation + center - rotation * center;
  return m;
}

Mat4 rigid_inverse(const Mat4& transform) {
  const Eigen::Matrix3d rt = transform.topLeftCorner<3, 3>().transpose();
  Mat4 inv = Mat4::Identity();
  inv.topLeftCorner<3, 3>() = rt;
  inv.topRightCorner<3, 1>() = -rt * transform.topRightCorner<3, 1>();
  return inv;
}

DetectorFrame detector_frame(const ImagingGeometry& geometry, const Vec3& isocenter) {
  DetectorFrame frame;
  if (geometry.view == View::kFront) {
    frame.beam_axis = Vec3::UnitY();
    frame.col_axis = Vec3::UnitX();
  } else {
    frame.beam_axis = Vec3::UnitX();
    frame.col_axis = Vec3::UnitY();
  }
  frame.row_axis = -Vec3::UnitZ();
  frame.source = isocenter - geometry.source_to_isocenter * frame.beam_axis;
  frame.detector_center =
      frame.source + geometry.source_to_detector * frame.beam_axis;
  return frame;
}

RayGenerator::RayGenerator(const ImagingGeometry& geometry, const RigidPose& pose,
                           const VolumeGeometry& volume)
    : geometry_(geometry) {
  init(rigid_inverse(pose_matrix(pose, volume.center())), volume);
}

RayGenerator::RayGenerator(const ImagingGeometry& geometry, const Mat4& world_to_volume,
                           const VolumeGeometry& volume)
    : geometry_(geometry) {
  init(world_to_volume, volume);
}

void RayGenerator::init(const Mat4& world_to_volume, const VolumeGeometry& volume) {
  geometry_.validate();
  volume.validate();
  frame_ = detector_frame(geometry_, volume.center());

  const Eigen::Matrix3d linear = world_to_volume.topLeftCorner<3, 3>();
  const Vec3 offset = world_to_volume.topRightCorner<3, 1>();
  auto to_index = [&](const Vec3& world) {
    return volume.world_to_index(linear * world + offset);
  };
  auto direction_to_index = [&](const Vec3& dir) {
    return (linear * dir).cwiseQuotient(volume.spacing);
  };

  const double half_rows = 0.5 * static_cast<double>(geometry_.rows - 1);
  const double half_cols = 0.5 * static_cast<double>(geometry_.cols - 1);
  const Vec3 first_world = frame_.detector_center -
                           half_rows * geometry_.row_pitch * frame_.row_axis -
                           half_cols * geometry_.col_pitch * frame_.col_axis;
  source_ = to_index(frame_.source);
  first_pixel_ = to_index(first_world);
  row_step_ = direction_to_index(geometry_.row_pitch * frame_.row_axis);
  col_step_ = direction_to_index(geometry_.col_pitch * frame_.col_axis);
}

Ray RayGenerator::world_ray(std::int64_t row, std::int64_t col) const {
  const double u = (static_cast<double>(col) - 0.5 * static_cast<double>(geometry_.cols - 1)) *
                   geometry_.col_pitch;
  const double v = (static_cast<double>(row) - 0.5 * static_cast<double>(geometry_.rows - 1)) *
                   geometry_.row_pitch;
  return {frame_.source, frame_.detector_center + u * frame_.col_axis + v * frame_.row_axis};
}

Ray make_ray(const ImagingGeometry& geometry, const RigidPose& pose,
             const VolumeGeometry& volume, std::int64_t row, std::int64_t col) {
  if (row < 0 || row >= geometry.rows || col < 0 || col >= geometry.cols) {
    fail(ErrorCode::kIndexOutOfRange, "pixel (" + std::to_string(row) + ", " +
                                          std::to_string(col) + ") outside " +
                                          std::to_string(geometry.rows) + "x" +
                                          std::to_string(geometry.cols) + " detector");
  }
  return RayGenerator(geometry, pose, volume)(row, col);
}

Ray make_ray(const ImagingGeometry& geometry, const RigidPose& pose, const CtVolume& volume,
             std::int64_t row, std::int64_t col) {
  return make_ray(geometry, pose, volume.geometry(), row, col);
}

RigidPose sample_pose(std::mt19937_64& rng, const PoseRanges& ranges) {
  ranges.validate();
  RigidPose pose;
  for (int a = 0; a < 3; ++a) pose.translation[a] = symmetric_uniform(rng, ranges.translation_bound);
  for (int a = 0; a < 3; ++a) pose.rotation_deg[a] = symmetric_uniform(rng, ranges.rotation_bound);
  return pose;
}

RigidPose sample_pose(std::uint64_t seed, const PoseRanges& ranges) {
  std::mt19937_64 rng(seed);
  return sample_pose(rng, ranges);
}

}  // namespace drr
