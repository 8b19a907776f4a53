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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "drr/geometry.hpp"
#include "drr/image_export.hpp"
#include "drr/projector.hpp"
#include "drr/volume_io.hpp"

namespace drr {

struct CaseSpec {
  std::string id;
  std::filesystem::path ct;
  std::filesystem::path labels;
};

// The nine (w0, w1, w2) tuples, from (12, 12, 1) down to (1, 1, 12).
std::vector<ClassWeights> default_weight_grid();
// T2 in {0.00, 0.01, 0.05, 0.10, 0.15, 0.20, 0.40} with T1 = 0.
std::vector<LabelThresholds> default_threshold_grid();

struct DatasetConfig {
  std::vector<CaseSpec> cases;
  LabelCodeMap label_codes = default_label_codes();
  bool ignore_orientation = false;

  std::vector<ClassWeights> weight_grid = default_weight_grid();
  std::vector<LabelThresholds> threshold_grid = default_threshold_grid();
  ClassWeights normal_weights{24.0, 24.0, 1.0};
  bool normal_phase = true;
  int per_case_per_view = 20;
  std::vector<View> views = {View::kFront, View::kLateral};
  PoseRanges pose_ranges;
  ImagingGeometry geometry;  // `view` is overridden per record
  IntensityMode intensity_mode = IntensityMode::kAttenuation;
  WeightNormalization normalization = WeightNormalization::kMeanWeight;
  Window window = Window::Auto();
  bool write_float = false;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir = "drr_dataset";

  // kEmptyDataset for no cases; kInvalidArgument for anything else.
  void validate() const;
};

// JSON mirrors DatasetConfig field for field; absent keys keep defaults.
// Relative case paths resolve against `base_dir`.
DatasetConfig dataset_config_from_json(std::string_view text,
                                       const std::filesystem::path& base_dir = {});
DatasetConfig load_dataset_config(const std::filesystem::path& path);
std::string dataset_config_to_json(const DatasetConfig& config);

// FNV-1a over the canonical config JSON, output_dir excluded.
std::string config_hash(const DatasetConfig& config);

enum class Phase { kNormal, kInfectionAware };
std::string_view to_string(Phase phase);

struct DatasetRecord {
  std::string case_id;
  View view = View::kFront;
  Phase phase = Phase::kInfectionAware;
  int index = 0;
  std::uint64_t seed = 0;
  RigidPose pose;
  ClassWeights weights;
  LabelThresholds thresholds;
  std::string image;  // relative to output_dir
  std::string mask;
  std::string raw;    // empty unless float dumps are enabled
  bool is_normal() const { return phase == Phase::kNormal; }
};

// Independent per-image seed: base seed mixed with a stable hash of
// (case, view, phase, index).
std::uint64_t record_seed(std::uint64_t base_seed, std::string_view case_id, View view,
                          Phase phase, int index);

// Subdirectory name for one (weights, thresholds) grid cell.
std::string cell_name(const ClassWeights& weights, const LabelThresholds& thresholds);

// Renders one case for one grid cell into output_dir/<cell>/<case>/.
// Records come back in (phase, view, index) order. `jobs` = 0 uses all
// hardware threads; it never changes any output byte.
std::vector<DatasetRecord> build_case(const CtVolume& ct, const LabelVolume& labels,
                                      std::string_view case_id, const DatasetConfig& config,
                                      const ClassWeights& weights,
                                      const LabelThresholds& thresholds, unsigned jobs = 0);

struct Manifest {
  std::string artifact_version;
  std::string config_hash;
  std::string window;
  std::uint64_t base_seed = 0;
  std::vector<std::string> cells;
  std::vector<DatasetRecord> records;

  std::string to_json() const;
  static Manifest from_json(std::string_view text);
};

// Every grid cell for every case, plus output_dir/manifest.json.
Manifest build_dataset(const DatasetConfig& config, unsigned jobs = 0);

std::string_view artifact_version();

}  // namespace drr
