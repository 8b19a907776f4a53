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

#include "drr/image_export.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <png.h>

#include "drr/error.hpp"

namespace drr {

std::string Window::describe() const {
  if (automatic) return "auto";
  std::ostringstream out;
  out.precision(17);
  out << "fixed(" << lo << "," << hi << ")";
  return out.str();
}

Gray8Image quantize(std::span<const double> values, std::int64_t rows, std::int64_t cols,
                    const Window& window) {
  if (static_cast<std::int64_t>(values.size()) != rows * cols) {
    fail(ErrorCode::kDimMismatch, "image value count does not match rows x cols");
  }
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteValue, "image holds a non-finite intensity");
  }
  Gray8Image out{rows, cols, std::vector<std::uint8_t>(values.size(), 128)};
  double lo = window.lo;
  double hi = window.hi;
  if (window.automatic) {
    if (values.empty()) return out;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
    if (!(hi > lo)) return out;
  } else if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorCode::kInvalidArgument, "fixed window needs finite lo < hi");
  }
  const double scale = 255.0 / (hi - lo);
  for (std::size_t n = 0; n < values.size(); ++n) {
    const double v = std::clamp(values[n], lo, hi);
    out.pixels[n] = static_cast<std::uint8_t>(std::lround(std::clamp((v - lo) * scale, 0.0, 255.0)));
  }
  return out;
}

Gray8Image export_image(const DrrImage& image, const Window& window) {
  return quantize(image.intensity, image.rows, image.cols, window);
}

Gray8Image export_mask(const DrrImage& image) {
  return {image.rows, image.cols, image.label};
}

void write_png(const std::filesystem::path& path, const Gray8Image& image) {
  if (static_cast<std::int64_t>(image.pixels.size()) != image.rows * image.cols ||
      image.rows < 1 || image.cols < 1) {
    fail(ErrorCode::kInvalidArgument, "PNG image has inconsistent size");
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.cols);
  png.height = static_cast<png_uint_32>(image.rows);
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.pixels.data(),
                               static_cast<png_int_32>(image.cols), nullptr)) {
    const std::string reason = png.message;
    png_image_free(&png);
    fail(ErrorCode::kIoFailure, "cannot write PNG '" + path.string() + "': " + reason);
  }
}

Gray8Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    const std::string reason = png.message;
    png_image_free(&png);
    fail(ErrorCode::kIoFailure, "cannot read PNG '" + path.string() + "': " + reason);
  }
  png.format = PNG_FORMAT_GRAY;
  Gray8Image out{png.height, png.width, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(png))};
  if (!png_image_finish_read(&png, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string reason = png.message;
    png_image_free(&png);
    fail(ErrorCode::kIoFailure, "cannot decode PNG '" + path.string() + "': " + reason);
  }
  return out;
}

void write_raw_f64(const std::filesystem::path& path, std::span<const double> values) {
  std::vector<char> bytes(values.size() * sizeof(double));
  for (std::size_t n = 0; n < values.size(); ++n) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(values[n]);
    for (int b = 0; b < 8; ++b) bytes[n * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIoFailure, "write error on '" + path.string() + "'");
}

std::vector<double> read_raw_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) fail(ErrorCode::kTruncatedData, "float64 dump length not a multiple of 8");
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t n = 0; n < values.size(); ++n) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[n * 8 + b])) << (8 * b);
    }
    values[n] = std::bit_cast<double>(bits);
  }
  return values;
}

}  // namespace drr
