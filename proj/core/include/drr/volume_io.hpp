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
#include <map>
#include <span>
#include <vector>

#include "drr/volume.hpp"

namespace drr {

// Reads a deliberately small NIfTI-1 subset (single-file .nii or .hdr/.img
// pairs, uncompressed, uint8/int16/float32, either byte order) and a raw
// payload with a JSON sidecar (`name.rawvol` + `name.rawvol.json`).
// The format is picked from the file extension.

enum class ScalarType : std::int16_t {
  kUint8 = 2,
  kInt16 = 4,
  kFloat32 = 16,
};

struct LoadOptions {
  // NIfTI only. By default any stored qform/sform that is more than a pure
  // translation is rejected with kUnsupportedOrientation; setting this keeps
  // the voxel grid as stored and takes only pixdim spacing.
  bool ignore_orientation = false;
};

// Decoded scalars after scl_slope/scl_inter, plus grid layout.
struct ScalarVolume {
  VolumeGeometry geometry;
  ScalarType stored_type = ScalarType::kFloat32;
  std::vector<double> values;
};

ScalarVolume read_scalar_volume(const std::filesystem::path& path,
                                const LoadOptions& options = {});

// Encodes `values` as `type`; values must be exactly representable
// (integral and in range for the integer types).
void write_scalar_volume(const std::filesystem::path& path,
                         const VolumeGeometry& geometry,
                         std::span<const double> values, ScalarType type);

CtVolume load_ct(const std::filesystem::path& path, const LoadOptions& options = {});

// Writes float32, so any CtVolume loads back voxel-identical.
void write_ct(const CtVolume& volume, const std::filesystem::path& path);

// Maps stored label codes to categories. Codes absent from the map are
// rejected with kUnknownLabelCode.
using LabelCodeMap = std::map<std::int64_t, std::uint8_t>;

// 0 -> background, 1 and 2 (left/right lung) -> lung, 3 -> infection.
LabelCodeMap default_label_codes();
LabelCodeMap identity_label_codes();

LabelVolume load_labels(const std::filesystem::path& path, const CtVolume& paired,
                        const LabelCodeMap& codes = default_label_codes(),
                        const LoadOptions& options = {});

// Same decoding without a paired CT, for mask-only statistics.
LabelVolume load_labels(const std::filesystem::path& path, const LabelCodeMap& codes,
                        const LoadOptions& options = {});

// Writes uint8 codes using the default code convention (lung -> 1,
// infection -> 3), so load_labels with default_label_codes() round-trips.
void write_labels(const LabelVolume& labels, const std::filesystem::path& path);

}  // namespace drr
