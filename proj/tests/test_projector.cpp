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
#include <cstring>
#include <random>

#include "drr/error.hpp"
#include "drr/projector.hpp"
#include "support/fixtures.hpp"

using namespace drr;
using drr::testing::cube_geometry;

namespace {

ImagingGeometry small_detector(std::int64_t n, double pitch = 1.0, View view = View::kFront) {
  ImagingGeometry g;
  g.rows = n;
  g.cols = n;
  g.row_pitch = pitch;
  g.col_pitch = pitch;
  g.view = view;
  return g;
}

bool relative_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_CASE("pixel_value evaluates the class-weighted sum") {
  const auto g = cube_geometry(2, 1, 1);
  const CtVolume ct(g, {2.0f, 4.0f});
  const LabelVolume labels(g, {1, 2});
  const std::vector<TraversalSegment> segments = {{{0, 0, 0}, 1.0}, {{1, 0, 0}, 1.0}};

  // numerator 0.5*2*1 + 0.5*4*3 = 7, mean weight (1+3)/2 = 2.
  CHECK(pixel_value(segments, ct, labels, {1, 1, 3}, IntensityMode::kRawHu) == doctest::Approx(3.5));
  CHECK(pixel_value(segments, ct, labels, {10, 10, 30}, IntensityMode::kRawHu) ==
        doctest::Approx(3.5));
  // Length-weighted alternative: 7 / (0.5*1 + 0.5*3).
  CHECK(pixel_value(segments, ct, labels, {1, 1, 3}, IntensityMode::kRawHu,
                    WeightNormalization::kLengthWeighted) == doctest::Approx(3.5));
  // Unequal lengths separate the two normalizations.
  const std::vector<TraversalSegment> uneven = {{{0, 0, 0}, 3.0}, {{1, 0, 0}, 1.0}};
  // l = (0.75, 0.25): numerator 1.5 + 3 = 4.5; mean weight 2; length-weighted 1.5.
  CHECK(pixel_value(uneven, ct, labels, {1, 1, 3}, IntensityMode::kRawHu) == doctest::Approx(2.25));
  CHECK(pixel_value(uneven, ct, labels, {1, 1, 3}, IntensityMode::kRawHu,
                    WeightNormalization::kLengthWeighted) == doctest::Approx(3.0));
  CHECK(pixel_value({}, ct, labels, {1, 1, 1}, IntensityMode::kRawHu) == 0.0);
}

TEST_CASE("homogeneous water volume projects to exactly one with equal weights") {
  const auto g = cube_geometry(12, 12, 12, Vec3(0.9, 1.2, 0.7));
  const CtVolume ct = drr::testing::constant_ct(g, 0.0f);
  std::mt19937_64 rng(17);
  const LabelVolume labels = drr::testing::random_labels(g, rng);
  for (int n = 0; n < 100; ++n) {
    const auto segments = traverse(drr::testing::random_crossing_ray(rng, g.dims), g.dims, g.spacing);
    REQUIRE(!segments.empty());
    CHECK(pixel_value(segments, ct, labels, {1, 1, 1}, IntensityMode::kAttenuation) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("contribution_rates") {
  const auto g = cube_geometry(2, 1, 1);
  const std::vector<TraversalSegment> segments = {{{0, 0, 0}, 1.0}, {{1, 0, 0}, 1.0}};

  const LabelVolume infected = drr::testing::constant_labels(g, 2);
  CHECK(contribution_rates(segments, infected, {1, 1, 1}) == Contributions{0, 0, 1});
  CHECK(contribution_rates(segments, infected, {5, 7, 0.01}) == Contributions{0, 0, 1});

  const LabelVolume split(g, {1, 2});
  const auto equal = contribution_rates(segments, split, {1, 1, 1});
  CHECK(equal[0] == 0.0);
  CHECK(equal[1] == doctest::Approx(0.5));
  CHECK(equal[2] == doctest::Approx(0.5));
  const auto boosted = contribution_rates(segments, split, {1, 1, 3});
  CHECK(boosted[1] == doctest::Approx(0.25));
  CHECK(boosted[2] == doctest::Approx(0.75));

  CHECK(contribution_rates({}, split, {1, 1, 1}) == kMissContributions);
}

TEST_CASE("classify_pixel uses strict comparisons") {
  CHECK(classify_pixel({0.1, 0.7, 0.2}, {0.0, 0.20}) == 1);
  CHECK(classify_pixel({1.0, 0.0, 0.0}, {0.0, 0.0}) == 0);
  CHECK(classify_pixel({1.0, 0.0, 0.0}, {0.5, 0.9}) == 0);
  CHECK(classify_pixel({0.5, 0.29, 0.21}, {0.0, 0.20}) == 2);
  // At T2 = 0 any positive infected contribution wins.
  CHECK(classify_pixel({0.999, 0.0, 0.001}, {0.0, 0.0}) == 2);
  CHECK(classify_pixel({0.6, 0.4, 0.0}, {0.4, 0.0}) == 0);
}

TEST_CASE("weights and thresholds are validated") {
  CHECK_THROWS_AS(ClassWeights({0, 1, 1}).validate(), Error);
  CHECK_THROWS_AS(ClassWeights({1, -1, 1}).validate(), Error);
  CHECK_THROWS_AS(ClassWeights({1, 1, std::nan("")}).validate(), Error);
  CHECK_THROWS_AS(LabelThresholds({0.0, 1.5}).validate(), Error);
  CHECK_NOTHROW(LabelThresholds({0.0, 1.0}).validate());
}

TEST_CASE("render: misses follow the background convention") {
  const auto phantom = drr::testing::lung_phantom(16);
  ImagingGeometry geom = small_detector(32, 2.0);
  RenderOptions options;
  const DrrImage image = render(phantom.ct, phantom.labels, RigidPose{}, geom, options);
  // Detector corners lie far outside the 16 mm volume shadow.
  const std::size_t corner = image.index(0, 0);
  CHECK(image.path_voxels[corner] == 0);
  CHECK(image.intensity[corner] == 0.0);
  CHECK(image.label[corner] == 0);
  CHECK(image.contributions[corner] == kMissContributions);
  // The center hits.
  CHECK(image.path_voxels[image.index(16, 16)] > 0);
}

TEST_CASE("render: equal weights reproduce the unweighted path-length image") {
  const auto phantom = drr::testing::lung_phantom(24, 1.5);
  std::mt19937_64 rng(8);
  for (View view : {View::kFront, View::kLateral}) {
    const ImagingGeometry geom = small_detector(24, 2.0, view);
    const RigidPose pose = sample_pose(rng, PoseRanges{10.0, 30.0});
    RenderOptions options;
    options.weights = {1, 1, 1};
    const DrrImage image = render(phantom.ct, phantom.labels, pose, geom, options);
    const auto standard = render_rpl(phantom.ct, pose, geom, IntensityMode::kAttenuation).normalized();
    for (std::size_t n = 0; n < image.size(); ++n) {
      CHECK(relative_close(image.intensity[n], standard[n], 1e-9));
    }
  }
}

TEST_CASE("render: output is independent of thread count") {
  const auto phantom = drr::testing::lung_phantom(20);
  const ImagingGeometry geom = small_detector(40, 0.8);
  RigidPose pose;
  pose.rotation_deg = Vec3(5, -12, 30);
  pose.translation = Vec3(2, -3, 1);
  RenderOptions options;
  options.weights = {1, 1, 3};
  options.thresholds = {0.0, 0.2};
  options.threads = 1;
  const DrrImage one = render(phantom.ct, phantom.labels, pose, geom, options);
  options.threads = 8;
  const DrrImage eight = render(phantom.ct, phantom.labels, pose, geom, options);
  CHECK(std::memcmp(one.intensity.data(), eight.intensity.data(), one.size() * sizeof(double)) == 0);
  CHECK(one.label == eight.label);
  CHECK(std::memcmp(one.contributions.data(), eight.contributions.data(),
                    one.size() * sizeof(Contributions)) == 0);
}

TEST_CASE("render: the (24, 24, 1) regime suppresses infection labels") {
  const auto phantom = drr::testing::lung_phantom(24);
  const ImagingGeometry geom = small_detector(32, 1.0);
  RenderOptions normal;
  normal.weights = {24, 24, 1};
  normal.thresholds = {0.0, 0.20};
  RenderOptions aware = normal;
  aware.weights = {1, 1, 3};
  const DrrImage n = render(phantom.ct, phantom.labels, RigidPose{}, geom, normal);
  const DrrImage a = render(phantom.ct, phantom.labels, RigidPose{}, geom, aware);
  const auto count2 = [](const DrrImage& img) { return std::count(img.label.begin(), img.label.end(), 2); };
  CHECK(count2(n) == 0);
  CHECK(count2(a) > 0);
  CHECK(std::count(n.label.begin(), n.label.end(), 1) > 0);
}

TEST_CASE("render: geometry mismatch") {
  const CtVolume ct = drr::testing::constant_ct(cube_geometry(4, 4, 4), 0.0f);
  const LabelVolume labels = drr::testing::constant_labels(cube_geometry(4, 4, 5), 0);
  try {
    render(ct, labels, RigidPose{}, small_detector(4), RenderOptions{});
    FAIL("expected GeometryMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGeometryMismatch);
  }
}

TEST_CASE("property: normalization, scaling invariance, monotonicity") {
  std::mt19937_64 rng(321);
  const auto g = cube_geometry(16, 16, 16, Vec3(1.0, 0.8, 1.2));
  const CtVolume ct = drr::testing::random_ct(g, rng, -1000.0f, 1000.0f);
  const LabelVolume labels = drr::testing::random_labels(g, rng);
  std::uniform_real_distribution<double> wdist(0.05, 20.0);

  for (int n = 0; n < 300; ++n) {
    const auto segments = traverse(drr::testing::random_crossing_ray(rng, g.dims), g.dims, g.spacing);
    REQUIRE(!segments.empty());
    const ClassWeights w{wdist(rng), wdist(rng), wdist(rng)};
    const Contributions pi = contribution_rates(segments, labels, w);
    CHECK(std::abs(pi[0] + pi[1] + pi[2] - 1.0) <= 1e-12);

    const double k = wdist(rng);
    const Contributions scaled = contribution_rates(segments, labels, w.scaled(k));
    for (int c = 0; c < 3; ++c) {
      CHECK((relative_close(pi[c], scaled[c], 1e-9) || std::abs(pi[c] - scaled[c]) < 1e-15));
    }
    const double p = pixel_value(segments, ct, labels, w, IntensityMode::kAttenuation);
    const double ps = pixel_value(segments, ct, labels, w.scaled(k), IntensityMode::kAttenuation);
    CHECK(relative_close(p, ps, 1e-9));

    double previous = -1.0;
    for (double w2 : {0.5, 1.0, 1.5, 3.0, 6.0, 12.0, 50.0}) {
      const double pi2 = contribution_rates(segments, labels, {w.w0, w.w1, w2})[2];
      CHECK(pi2 >= previous);
      previous = pi2;
    }
  }
}
