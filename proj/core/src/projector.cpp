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

#include "drr/projector.hpp"

#include <cmath>
#include <string>

#include "drr/error.hpp"
#include "drr/parallel.hpp"

namespace drr {
namespace {

template <IntensityMode Mode>
inline double intensity_of(float hu) {
  if constexpr (Mode == IntensityMode::kRawHu) {
    return hu;
  } else {
    const double v = (static_cast<double>(hu) + 1000.0) / 1000.0;
    return v > 0.0 ? v : 0.0;
  }
}

template <IntensityMode Mode>
void render_rows(const CtVolume& ct, const LabelVolume& labels, const RayGenerator& rays,
                 const RenderOptions& options, DrrImage& image, std::int64_t row_begin,
                 std::int64_t row_end) {
  const auto hu = ct.values();
  const auto categories = labels.categories();
  const std::array<double, kCategoryCount> weight = options.weights.as_array();
  const Dims& dims = ct.dims();
  const Vec3& spacing = ct.spacing();

  for (std::int64_t row = row_begin; row < row_end; ++row) {
    for (std::int64_t col = 0; col < image.cols; ++col) {
      RayAccumulator acc;
      walk_ray(rays(row, col), dims, spacing,
               [&](std::size_t linear, std::int64_t, std::int64_t, std::int64_t, double length) {
                 const std::uint8_t category = categories[linear];
                 acc.add(length, intensity_of<Mode>(hu[linear]), category, weight[category]);
               });
      const std::size_t at = image.index(row, col);
      if (acc.empty()) {
        image.intensity[at] = 0.0;
        image.contributions[at] = kMissContributions;
        image.label[at] = 0;
        image.path_voxels[at] = 0;
        continue;
      }
      image.intensity[at] = acc.value(options.normalization);
      image.contributions[at] = acc.contributions();
      image.label[at] = classify_pixel(image.contributions[at], options.thresholds);
      image.path_voxels[at] = acc.voxels;
    }
  }
}

template <IntensityMode Mode>
void rpl_rows(const CtVolume& ct, const RayGenerator& rays, RplImage& image,
              std::int64_t row_begin, std::int64_t row_end) {
  const auto hu = ct.values();
  for (std::int64_t row = row_begin; row < row_end; ++row) {
    for (std::int64_t col = 0; col < image.cols; ++col) {
      double integral = 0.0;
      double chord = 0.0;
      walk_ray(rays(row, col), ct.dims(), ct.spacing(),
               [&](std::size_t linear, std::int64_t, std::int64_t, std::int64_t, double length) {
                 integral += length * intensity_of<Mode>(hu[linear]);
                 chord += length;
               });
      const auto at = static_cast<std::size_t>(row * image.cols + col);
      image.path_integral[at] = integral;
      image.chord[at] = chord;
    }
  }
}

}  // namespace

void ClassWeights::validate() const {
  for (double w : {w0, w1, w2}) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      fail(ErrorCode::kInvalidArgument, "class weights must be finite and > 0");
    }
  }
}

void LabelThresholds::validate() const {
  for (double t : {t1, t2}) {
    if (!(t >= 0.0 && t <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "label thresholds must lie in [0, 1]");
    }
  }
}

std::string_view to_string(WeightNormalization normalization) {
  return normalization == WeightNormalization::kMeanWeight ? "mean_weight" : "length_weighted";
}

WeightNormalization weight_normalization_from_string(std::string_view name) {
  if (name == "mean_weight") return WeightNormalization::kMeanWeight;
  if (name == "length_weighted") return WeightNormalization::kLengthWeighted;
  fail(ErrorCode::kInvalidArgument, "unknown weight normalization '" + std::string(name) + "'");
}

double RayAccumulator::value(WeightNormalization normalization) const {
  if (voxels == 0) return 0.0;
  if (normalization == WeightNormalization::kLengthWeighted) {
    return weighted_value / (weighted_length[0] + weighted_length[1] + weighted_length[2]);
  }
  const double mean_weight = weight_sum / static_cast<double>(voxels);
  return (weighted_value / length) / mean_weight;
}

Contributions RayAccumulator::contributions() const {
  if (voxels == 0) return kMissContributions;
  const double total = weighted_length[0] + weighted_length[1] + weighted_length[2];
  return {weighted_length[0] / total, weighted_length[1] / total, weighted_length[2] / total};
}

namespace {

RayAccumulator accumulate(std::span<const TraversalSegment> segments, const LabelVolume& labels,
                          const ClassWeights& weights, const CtVolume* ct, IntensityMode mode) {
  RayAccumulator acc;
  for (const TraversalSegment& s : segments) {
    const auto [i, j, k] = s.voxel;
    const std::uint8_t category = labels.at(i, j, k);
    const double rho = ct != nullptr ? hu_to_intensity(ct->at(i, j, k), mode) : 0.0;
    acc.add(s.raw_length, rho, category, weights.for_category(category));
  }
  return acc;
}

}  // namespace

double pixel_value(std::span<const TraversalSegment> segments, const CtVolume& ct,
                   const LabelVolume& labels, const ClassWeights& weights, IntensityMode mode,
                   WeightNormalization normalization) {
  weights.validate();
  return accumulate(segments, labels, weights, &ct, mode).value(normalization);
}

Contributions contribution_rates(std::span<const TraversalSegment> segments,
                                 const LabelVolume& labels, const ClassWeights& weights) {
  weights.validate();
  return accumulate(segments, labels, weights, nullptr, IntensityMode::kRawHu).contributions();
}

std::uint8_t classify_pixel(const Contributions& contributions,
                            const LabelThresholds& thresholds) {
  if (contributions[2] > thresholds.t2) return 2;
  if (contributions[1] > thresholds.t1) return 1;
  return 0;
}

DrrImage render(const CtVolume& ct, const LabelVolume& labels, const RigidPose& pose,
                const ImagingGeometry& geometry, const RenderOptions& options) {
  require_paired(ct, labels);
  options.weights.validate();
  options.thresholds.validate();
  const RayGenerator rays(geometry, pose, ct.geometry());

  DrrImage image;
  image.rows = geometry.rows;
  image.cols = geometry.cols;
  image.intensity.resize(image.size());
  image.label.resize(image.size());
  image.contributions.resize(image.size());
  image.path_voxels.resize(image.size());

  parallel_for_blocks(image.rows, options.threads, [&](std::int64_t begin, std::int64_t end) {
    if (options.mode == IntensityMode::kRawHu) {
      render_rows<IntensityMode::kRawHu>(ct, labels, rays, options, image, begin, end);
    } else {
      render_rows<IntensityMode::kAttenuation>(ct, labels, rays, options, image, begin, end);
    }
  });
  return image;
}

void relabel(DrrImage& image, const LabelThresholds& thresholds) {
  thresholds.validate();
  for (std::size_t n = 0; n < image.size(); ++n) {
    image.label[n] = image.path_voxels[n] == 0 ? 0 : classify_pixel(image.contributions[n], thresholds);
  }
}

std::vector<double> RplImage::normalized() const {
  std::vector<double> out(path_integral.size(), 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (chord[n] > 0.0) out[n] = path_integral[n] / chord[n];
  }
  return out;
}

RplImage render_rpl(const CtVolume& ct, const RigidPose& pose, const ImagingGeometry& geometry,
                    IntensityMode mode, unsigned threads) {
  const RayGenerator rays(geometry, pose, ct.geometry());
  RplImage image;
  image.rows = geometry.rows;
  image.cols = geometry.cols;
  image.path_integral.resize(static_cast<std::size_t>(image.rows * image.cols));
  image.chord.resize(image.path_integral.size());
  parallel_for_blocks(image.rows, threads, [&](std::int64_t begin, std::int64_t end) {
    if (mode == IntensityMode::kRawHu) {
      rpl_rows<IntensityMode::kRawHu>(ct, rays, image, begin, end);
    } else {
      rpl_rows<IntensityMode::kAttenuation>(ct, rays, image, begin, end);
    }
  });
  return image;
}

}  // namespace drr
