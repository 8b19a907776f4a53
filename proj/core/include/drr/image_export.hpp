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
#include <span>
#include <string>
#include <vector>

#include "drr/projector.hpp"

namespace drr {

// Intensity window used when quantizing to 8 bits.
struct Window {
  bool automatic = true;  // use the image's own [min, max]
  double lo = 0.0;
  double hi = 1.0;

  static Window Auto() { return {}; }
  static Window Fixed(double lo, double hi) { return {false, lo, hi}; }
  std::string describe() const;
};

struct Gray8Image {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  friend bool operator==(const Gray8Image&, const Gray8Image&) = default;
};

// Linear map of the window onto [0, 255]. An automatic window over a
// constant image yields mid-gray 128. Throws kNonFiniteValue.
Gray8Image quantize(std::span<const double> values, std::int64_t rows, std::int64_t cols,
                    const Window& window);

Gray8Image export_image(const DrrImage& image, const Window& window);

// Category mask with raw byte values 0, 1, 2.
Gray8Image export_mask(const DrrImage& image);

void write_png(const std::filesystem::path& path, const Gray8Image& image);
Gray8Image read_png(const std::filesystem::path& path);

// Headerless little-endian float64 dump, row-major.
void write_raw_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_raw_f64(const std::filesystem::path& path);

}  // namespace drr
