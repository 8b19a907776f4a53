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

#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "drr/error.hpp"
#include "drr/geometry.hpp"
#include "support/fixtures.hpp"

using namespace drr;
using drr::testing::cube_geometry;

namespace {

void check_rigid(const Mat4& m) {
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(r.determinant() - 1.0) < 1e-9);
  CHECK(m.row(3).isApprox(Eigen::RowVector4d(0, 0, 0, 1)));
}

double distance_to_line(const Vec3& p, const Ray& ray) {
  const Vec3 d = (ray.endpoint - ray.origin).normalized();
  return (p - ray.origin).cross(d).norm();
}

}  // namespace

TEST_CASE("pose_matrix basics") {
  CHECK(pose_matrix(RigidPose{}, Vec3(3, 4, 5)).isApprox(Mat4::Identity()));

  RigidPose quarter;
  quarter.rotation_deg = Vec3(0, 0, 90);
  const Mat4 m = pose_matrix(quarter, Vec3::Zero());
  const Eigen::Vector4d mapped = m * Eigen::Vector4d(1, 0, 0, 1);
  CHECK((mapped.head<3>() - Vec3(0, 1, 0)).norm() < 1e-12);

  // Rotations apply about the fixed x axis first, then y.
  RigidPose xy;
  xy.rotation_deg = Vec3(90, 90, 0);
  const Eigen::Vector4d e = pose_matrix(xy, Vec3::Zero()) * Eigen::Vector4d(0, 1, 0, 1);
  // x-rotation sends +y to +z; y-rotation then sends +z to +x.
  CHECK((e.head<3>() - Vec3(1, 0, 0)).norm() < 1e-12);

  // The center stays fixed under pure rotation.
  RigidPose r;
  r.rotation_deg = Vec3(10, -20, 30);
  const Vec3 c(5, 6, 7);
  const Eigen::Vector4d cc = pose_matrix(r, c) * c.homogeneous();
  CHECK((cc.head<3>() - c).norm() < 1e-12);
}

TEST_CASE("pose_matrix is always a proper rigid transform") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 500; ++n) {
    const RigidPose pose = sample_pose(rng, PoseRanges{200.0, 180.0});
    const Mat4 m = pose_matrix(pose, Vec3(1, 2, 3));
    check_rigid(m);
    CHECK((m * rigid_inverse(m) - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("make_ray geometry") {
  const auto volume = cube_geometry(64, 64, 64, Vec3(0.8, 0.8, 1.5), Vec3(-10, 20, 5));
  ImagingGeometry geom;
  geom.rows = 3;
  geom.cols = 3;
  geom.row_pitch = 1.0;
  geom.col_pitch = 1.0;

  SUBCASE("central pixel with identity pose passes through the volume center") {
    const Ray ray = make_ray(geom, RigidPose{}, volume, 1, 1);
    const Vec3 center_index = volume.world_to_index(volume.center());
    // Distance measured in mm.
    const Vec3 a = volume.index_to_world(ray.origin);
    const Vec3 b = volume.index_to_world(ray.endpoint);
    CHECK(distance_to_line(volume.center(), Ray{a, b}) < 1e-9);
    CHECK(center_index.isApprox(Vec3(32, 32, 32)));
  }

  SUBCASE("front and lateral axes are orthogonal") {
    ImagingGeometry lateral = geom;
    lateral.view = View::kLateral;
    const Ray f = make_ray(geom, RigidPose{}, volume, 1, 1);
    const Ray l = make_ray(lateral, RigidPose{}, volume, 1, 1);
    const Vec3 df = volume.index_to_world(f.endpoint) - volume.index_to_world(f.origin);
    const Vec3 dl = volume.index_to_world(l.endpoint) - volume.index_to_world(l.origin);
    CHECK(std::abs(df.normalized().dot(dl.normalized())) < 1e-12);
    CHECK(std::abs(df.normalized().dot(Vec3::UnitY())) == doctest::Approx(1.0));
    CHECK(std::abs(dl.normalized().dot(Vec3::UnitX())) == doctest::Approx(1.0));
  }

  SUBCASE("corner pixel sits one pitch off the detector center on both axes") {
    const RayGenerator gen(geom, RigidPose{}, volume);
    const Ray center = gen.world_ray(1, 1);
    for (auto [r, c] : {std::pair{0, 0}, {0, 2}, {2, 0}, {2, 2}}) {
      const Ray corner = gen.world_ray(r, c);
      const Vec3 offset = corner.endpoint - center.endpoint;
      CHECK(std::abs(offset.x()) == doctest::Approx(1.0));
      CHECK(std::abs(offset.z()) == doctest::Approx(1.0));
      CHECK(offset.y() == doctest::Approx(0.0));
      // Same point expressed in index space by make_ray.
      const Ray idx = make_ray(geom, RigidPose{}, volume, r, c);
      CHECK((volume.index_to_world(idx.endpoint) - corner.endpoint).norm() < 1e-9);
    }
  }

  SUBCASE("out-of-range pixel") {
    CHECK_THROWS_AS(make_ray(geom, RigidPose{}, volume, 3, 0), Error);
    CHECK_THROWS_AS(make_ray(geom, RigidPose{}, volume, 0, -1), Error);
  }
}

TEST_CASE("rays survive a matrix/inverse round trip") {
  const auto volume = cube_geometry(32, 40, 24, Vec3(0.7, 0.9, 1.3));
  ImagingGeometry geom;
  geom.rows = 8;
  geom.cols = 8;
  std::mt19937_64 rng(5);
  for (int n = 0; n < 50; ++n) {
    const RigidPose pose = sample_pose(rng, PoseRanges{});
    const Mat4 m = pose_matrix(pose, volume.center());
    const Mat4 roundtrip = m.inverse().inverse();
    const RayGenerator direct(geom, pose, volume);
    const RayGenerator via_matrix(geom, Mat4(roundtrip.inverse()), volume);
    for (int r = 0; r < geom.rows; r += 3) {
      for (int c = 0; c < geom.cols; c += 3) {
        CHECK((direct(r, c).endpoint - via_matrix(r, c).endpoint).norm() < 1e-6);
        CHECK((direct(r, c).origin - via_matrix(r, c).origin).norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("translation moves the projected volume") {
  // Shifting the volume +x by one voxel shifts the ray's index-space
  // endpoint by -1 voxel along x.
  const auto volume = cube_geometry(16, 16, 16);
  ImagingGeometry geom;
  geom.rows = 4;
  geom.cols = 4;
  RigidPose shifted;
  shifted.translation = Vec3(1, 0, 0);
  const Ray a = make_ray(geom, RigidPose{}, volume, 2, 2);
  const Ray b = make_ray(geom, shifted, volume, 2, 2);
  CHECK(((a.endpoint - b.endpoint) - Vec3(1, 0, 0)).norm() < 1e-9);
}

TEST_CASE("sample_pose") {
  SUBCASE("zero ranges give the identity pose") {
    const RigidPose p = sample_pose(std::uint64_t{42}, PoseRanges{0.0, 0.0});
    CHECK(p == RigidPose{});
  }
  SUBCASE("same seed, same pose bit for bit") {
    const RigidPose a = sample_pose(std::uint64_t{1234}, PoseRanges{});
    const RigidPose b = sample_pose(std::uint64_t{1234}, PoseRanges{});
    CHECK(std::memcmp(a.translation.data(), b.translation.data(), sizeof(double) * 3) == 0);
    CHECK(std::memcmp(a.rotation_deg.data(), b.rotation_deg.data(), sizeof(double) * 3) == 0);
  }
  SUBCASE("uniform within bounds with zero mean") {
    constexpr int kSamples = 10000;
    const PoseRanges ranges;
    std::array<double, 6> sum{};
    for (int n = 0; n < kSamples; ++n) {
      const RigidPose p = sample_pose(static_cast<std::uint64_t>(n) * 7919u + 1u, ranges);
      for (int a = 0; a < 3; ++a) {
        REQUIRE(std::abs(p.translation[a]) <= 100.0);
        REQUIRE(std::abs(p.rotation_deg[a]) <= 45.0);
        sum[a] += p.translation[a];
        sum[a + 3] += p.rotation_deg[a];
      }
    }
    // Uniform on [-b, b]: sd b / sqrt(3), standard error of the mean sd / sqrt(n).
    for (int a = 0; a < 6; ++a) {
      const double bound = a < 3 ? 100.0 : 45.0;
      const double se = bound / std::sqrt(3.0) / std::sqrt(static_cast<double>(kSamples));
      CHECK(std::abs(sum[a] / kSamples) < 3.0 * se);
    }
  }
  SUBCASE("negative bounds are rejected") {
    CHECK_THROWS_AS(sample_pose(std::uint64_t{1}, PoseRanges{-1.0, 0.0}), Error);
  }
}

TEST_CASE("imaging geometry validation") {
  ImagingGeometry g;
  g.source_to_isocenter = 2000.0;
  CHECK_THROWS_AS(g.validate(), Error);
  g = ImagingGeometry{};
  g.rows = 0;
  CHECK_THROWS_AS(g.validate(), Error);
  g = ImagingGeometry{};
  g.col_pitch = 0.0;
  CHECK_THROWS_AS(g.validate(), Error);
}
