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
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "drr/geometry.hpp"
#include "drr/traversal.hpp"
#include "drr/volume.hpp"

namespace drr {

// Per-category projection weights (background, lung, infection).
struct ClassWeights {
  double w0 = 1.0;
  double w1 = 1.0;
  double w2 = 1.0;

  // Throws kInvalidArgument unless all three are finite and > 0.
  void validate() const;
  double for_category(std::uint8_t category) const {
    return category == 2 ? w2 : category == 1 ? w1 : w0;
  }
  std::array<double, 3> as_array() const { return {w0, w1, w2}; }
  ClassWeights scaled(double k) const { return {k * w0, k * w1, k * w2}; }
  friend auto operator<=>(const ClassWeights&, const ClassWeights&) = default;
};

// Contribution thresholds for the lung (t1) and infection (t2) labels.
struct LabelThresholds {
  double t1 = 0.0;
  double t2 = 0.0;

  void validate() const;
  friend auto operator<=>(const LabelThresholds&, const LabelThresholds&) = default;
};

// Contribution rate of each category to one pixel, summing to 1.
using Contributions = std::array<double, kCategoryCount>;

inline constexpr Contributions kMissContributions = {1.0, 0.0, 0.0};

// How the weighted path sum is normalized.
enum class WeightNormalization {
  // Divide by the unweighted mean weight of the voxels on the ray.
  kMeanWeight,
  // Divide by the length-weighted mean weight (a true weighted average).
  kLengthWeighted,
};

std::string_view to_string(WeightNormalization normalization);
WeightNormalization weight_normalization_from_string(std::string_view name);

// Running sums for one ray.
struct RayAccumulator {
  double length = 0.0;           // sum of raw lengths (mm)
  double weight_sum = 0.0;       // sum of w over voxels
  double weighted_value = 0.0;   // sum of raw_length * rho * w
  std::array<double, kCategoryCount> weighted_length{};  // sum of raw_length * w per category
  std::uint32_t voxels = 0;

  void add(double raw_length, double rho, std::uint8_t category, double weight) {
    length += raw_length;
    weight_sum += weight;
    weighted_value += raw_length * rho * weight;
    weighted_length[category] += raw_length * weight;
    ++voxels;
  }

  bool empty() const { return voxels == 0; }

  // Pixel value with lengths normalized to sum to one over the ray.
  double value(WeightNormalization normalization) const;
  Contributions contributions() const;
};

double pixel_value(std::span<const TraversalSegment> segments, const CtVolume& ct,
                   const LabelVolume& labels, const ClassWeights& weights, IntensityMode mode,
                   WeightNormalization normalization = WeightNormalization::kMeanWeight);

Contributions contribution_rates(std::span<const TraversalSegment> segments,
                                 const LabelVolume& labels, const ClassWeights& weights);

// 2 if pi2 > t2, else 1 if pi1 > t1, else 0 (strict comparisons).
std::uint8_t classify_pixel(const Contributions& contributions, const LabelThresholds& thresholds);

struct DrrImage {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> intensity;
  std::vector<std::uint8_t> label;
  std::vector<Contributions> contributions;
  std::vector<std::uint32_t> path_voxels;  // 0 marks a pixel whose ray misses

  std::size_t index(std::int64_t row, std::int64_t col) const {
    return static_cast<std::size_t>(row * cols + col);
  }
  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

struct RenderOptions {
  ClassWeights weights;
  LabelThresholds thresholds;
  IntensityMode mode = IntensityMode::kAttenuation;
  WeightNormalization normalization = WeightNormalization::kMeanWeight;
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Class-weighted projection of a labeled CT volume. Output does not depend
// on options.threads.
DrrImage render(const CtVolume& ct, const LabelVolume& labels, const RigidPose& pose,
                const ImagingGeometry& geometry, const RenderOptions& options);

// Recomputes labels from stored contributions.
void relabel(DrrImage& image, const LabelThresholds& thresholds);

// Plain radiological path length image: per pixel, sum of raw_length * rho
// and the chord length, both in mm.
struct RplImage {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> path_integral;
  std::vector<double> chord;

  // path_integral / chord, or 0 where the ray misses.
  std::vector<double> normalized() const;
};

RplImage render_rpl(const CtVolume& ct, const RigidPose& pose, const ImagingGeometry& geometry,
                    IntensityMode mode, unsigned threads = 0);

}  // namespace drr
