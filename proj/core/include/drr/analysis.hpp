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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drr/geometry.hpp"
#include "drr/projector.hpp"
#include "drr/volume.hpp"

namespace drr {

// Infected share of the lung region: #infection / (#lung + #infection).
// Throws kNoLungRegion when both counts are zero.
double infected_proportion(const LabelVolume& labels);

// Weighted infected fraction w2 p / (w1 (1 - p) + w2 p); the identity when
// w1 == w2.
double eapiv(double proportion, const ClassWeights& weights);

struct CaseStats {
  std::string case_id;
  std::int64_t infected_voxels = 0;
  std::int64_t lung_voxels = 0;  // category 1 only
  double proportion = 0.0;
  std::vector<std::pair<ClassWeights, double>> eapiv_by_weights;
};

CaseStats case_stats(std::string case_id, const LabelVolume& labels,
                     std::span<const ClassWeights> weight_grid);

struct EapivSummary {
  ClassWeights weights;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over cases
};

// Per weight tuple, mean and spread of the per-case equivalents.
// Throws kEmptyInput without cases.
std::vector<EapivSummary> eapiv_table(std::span<const CaseStats> cases,
                                      std::span<const ClassWeights> weight_grid);

// Histogram of infected contribution rates over [0, 1] with uniform bins.
// Only pixels with pi2 > 0 are counted.
struct CrivHistogram {
  std::vector<double> edges;  // bins + 1, strictly increasing
  std::vector<std::int64_t> counts;
  std::int64_t pixels_seen = 0;  // every rendered pixel, counted or not
  double value_sum = 0.0;        // sum of counted pi2 values

  explicit CrivHistogram(int bins = 50);

  int bins() const { return static_cast<int>(counts.size()); }
  std::int64_t included() const;
  double mean() const;
  void add(double pi2);
  void add_image(const DrrImage& image);
  void merge(const CrivHistogram& other);
  // Columns bin_lo, bin_hi, count.
  std::string to_csv() const;
};

CrivHistogram criv_histogram(const CtVolume& ct, const LabelVolume& labels,
                             std::span<const RigidPose> poses, const ImagingGeometry& geometry,
                             const ClassWeights& weights, int bins,
                             IntensityMode mode = IntensityMode::kAttenuation,
                             unsigned threads = 0);

}  // namespace drr
