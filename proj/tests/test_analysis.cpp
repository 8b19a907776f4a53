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

#include <random>
#include <sstream>

#include "drr/analysis.hpp"
#include "drr/error.hpp"
#include "support/fixtures.hpp"

using namespace drr;
using drr::testing::cube_geometry;

namespace {

LabelVolume labels_with(std::int64_t infected, std::int64_t lung) {
  const VolumeGeometry g = cube_geometry(10, 10, 10);
  std::vector<std::uint8_t> cat(1000, 0);
  for (std::int64_t n = 0; n < infected + lung; ++n) {
    cat[static_cast<std::size_t>(n)] = n < infected ? 2 : 1;
  }
  return LabelVolume(g, std::move(cat));
}

}  // namespace

TEST_CASE("infected_proportion") {
  CHECK(infected_proportion(drr::testing::ten_percent_labels()) == doctest::Approx(0.1));
  CHECK(infected_proportion(labels_with(0, 50)) == 0.0);
  CHECK(infected_proportion(labels_with(30, 0)) == 1.0);
  try {
    infected_proportion(labels_with(0, 0));
    FAIL("expected NoLungRegion");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoLungRegion);
  }
}

TEST_CASE("eapiv examples") {
  CHECK(eapiv(0.1, {1, 1, 1}) == doctest::Approx(0.1));
  CHECK(eapiv(0.1, {1, 1, 3}) == doctest::Approx(0.25));
  CHECK(eapiv(0.0851, {12, 12, 1}) == doctest::Approx(0.007692).epsilon(1e-4));
  CHECK(eapiv(0.0, {1, 1, 5}) == 0.0);
  CHECK(eapiv(1.0, {3, 7, 1}) == 1.0);
  CHECK_THROWS_AS(eapiv(1.5, {1, 1, 1}), Error);
  CHECK_THROWS_AS(eapiv(0.5, {1, 0, 1}), Error);
}

TEST_CASE("property: eapiv identity, monotonicity and scale invariance") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> wdist(0.1, 30.0);
  for (int n = 0; n < 1000; ++n) {
    const double p = unit(rng);
    const double w = wdist(rng);
    CHECK(eapiv(p, {wdist(rng), w, w}) == doctest::Approx(p).epsilon(1e-12));

    const ClassWeights a{1.0, wdist(rng), wdist(rng)};
    const ClassWeights more{a.w0, a.w1, a.w2 * 1.5};
    CHECK(eapiv(p, more) >= eapiv(p, a));
    const double k = wdist(rng);
    CHECK(eapiv(p, a.scaled(k)) == doctest::Approx(eapiv(p, a)).epsilon(1e-12));
  }
}

TEST_CASE("case_stats and eapiv_table") {
  const std::vector<ClassWeights> grid = {{1, 1, 1}, {1, 1, 3}};
  const std::vector<CaseStats> cases = {case_stats("a", labels_with(0, 100), grid),
                                        case_stats("b", labels_with(20, 80), grid)};
  CHECK(cases[1].infected_voxels == 20);
  CHECK(cases[1].lung_voxels == 80);
  CHECK(cases[1].proportion == doctest::Approx(0.2));
  REQUIRE(cases[1].eapiv_by_weights.size() == 2);

  const auto table = eapiv_table(cases, grid);
  REQUIRE(table.size() == 2);
  CHECK(table[0].mean == doctest::Approx(0.10));
  CHECK(table[0].stddev == doctest::Approx(0.10));
  // (1,1,3) at p = 0.2 -> 0.6 / 1.4.
  CHECK(table[1].mean == doctest::Approx(0.5 * 0.6 / 1.4));

  const std::vector<CaseStats> single = {case_stats("c", drr::testing::ten_percent_labels(), grid)};
  const auto one = eapiv_table(single, grid);
  CHECK(one[0].mean == doctest::Approx(0.1));
  CHECK(one[0].stddev == 0.0);

  try {
    eapiv_table({}, grid);
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyInput);
  }
}

TEST_CASE("histogram bookkeeping") {
  CrivHistogram h(10);
  REQUIRE(h.edges.size() == 11);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 1.0);
  h.add(0.0);  // excluded
  h.add(0.05);
  h.add(0.1);
  h.add(1.0);  // lands in the last bin
  CHECK(h.included() == 3);
  CHECK(h.counts[0] == 1);
  CHECK(h.counts[1] == 1);
  CHECK(h.counts[9] == 1);
  CHECK(h.mean() == doctest::Approx((0.05 + 0.1 + 1.0) / 3));

  CrivHistogram other(10);
  other.add(0.55);
  h.merge(other);
  CHECK(h.counts[5] == 1);
  CHECK(h.included() == 4);
  CHECK_THROWS_AS(h.merge(CrivHistogram(5)), Error);
  CHECK_THROWS_AS(CrivHistogram(0), Error);

  std::istringstream csv(h.to_csv());
  std::string line;
  std::getline(csv, line);
  CHECK(line == "bin_lo,bin_hi,count");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 10);
}

TEST_CASE("histogram of a layered volume is a single spike") {
  // Infection fills the first quarter along the beam axis; rays are
  // nearly parallel to that axis.
  const VolumeGeometry g = cube_geometry(16, 16, 16);
  std::vector<std::uint8_t> cat(static_cast<std::size_t>(g.dims.count()));
  for (std::int64_t k = 0; k < 16; ++k)
    for (std::int64_t j = 0; j < 16; ++j)
      for (std::int64_t i = 0; i < 16; ++i) cat[g.linear_index(i, j, k)] = j < 4 ? 2 : 1;
  const LabelVolume labels(g, std::move(cat));
  const CtVolume ct = drr::testing::constant_ct(g, -800.0f);

  ImagingGeometry geom;
  geom.rows = 8;
  geom.cols = 8;
  geom.row_pitch = 0.1;
  geom.col_pitch = 0.1;
  const std::vector<RigidPose> poses = {RigidPose{}};

  const CrivHistogram even = criv_histogram(ct, labels, poses, geom, {1, 1, 1}, 10);
  CHECK(even.included() == 64);
  CHECK(even.counts[2] == 64);  // 0.25
  const CrivHistogram boosted = criv_histogram(ct, labels, poses, geom, {1, 1, 4}, 10);
  CHECK(boosted.counts[5] == 64);  // 1 / 1.75
}

TEST_CASE("histogram on the phantom") {
  const auto phantom = drr::testing::lung_phantom(20);
  ImagingGeometry geom;
  geom.rows = 32;
  geom.cols = 32;
  geom.row_pitch = 1.0;
  geom.col_pitch = 1.0;
  std::vector<RigidPose> poses;
  for (std::uint64_t s = 0; s < 3; ++s) poses.push_back(sample_pose(s, PoseRanges{5.0, 20.0}));

  double previous = -1.0;
  for (double w2 : {1.0, 1.5, 3.0, 6.0, 12.0}) {
    const CrivHistogram h = criv_histogram(phantom.ct, phantom.labels, poses, geom, {1, 1, w2}, 50);
    CHECK(h.included() > 0);
    CHECK(h.pixels_seen == 3 * 32 * 32);
    CHECK(h.mean() > previous);
    previous = h.mean();
  }

  // Counted pixels are exactly those with positive infected contribution.
  RenderOptions options;
  options.weights = {1, 1, 3};
  std::int64_t positive = 0;
  for (const RigidPose& pose : poses) {
    const DrrImage img = render(phantom.ct, phantom.labels, pose, geom, options);
    for (const auto& pi : img.contributions) positive += pi[2] > 0.0;
  }
  const CrivHistogram h = criv_histogram(phantom.ct, phantom.labels, poses, geom, {1, 1, 3}, 50);
  CHECK(h.included() == positive);
  const CrivHistogram scaled = criv_histogram(phantom.ct, phantom.labels, poses, geom, {4, 4, 12}, 50);
  CHECK(scaled.counts == h.counts);
  const CrivHistogram threaded = criv_histogram(phantom.ct, phantom.labels, poses, geom, {1, 1, 3}, 50,
                                                IntensityMode::kAttenuation, 4);
  CHECK(threaded.counts == h.counts);

  const LabelVolume clean = drr::testing::constant_labels(phantom.labels.geometry(), 1);
  CHECK(criv_histogram(phantom.ct, clean, poses, geom, {1, 1, 3}, 50).included() == 0);
}
