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

#include "drr/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "drr/error.hpp"

namespace drr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::int32_t kNiftiHeaderSize = 348;
constexpr std::int32_t kNiftiDataOffset = 352;  // header + empty extension flag

// Byte offsets of the NIfTI-1 header fields this reader honors.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffQuatern = 256;
constexpr std::size_t kOffQoffset = 268;
constexpr std::size_t kOffSrow = 280;
constexpr std::size_t kOffMagic = 344;

std::vector<char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIoFailure, "read error on '" + path.string() + "'");
  return bytes;
}

void write_file(const fs::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) fail(ErrorCode::kIoFailure, "write error on '" + path.string() + "'");
}

template <typename T>
T load_scalar(const char* p, bool swap) {
  std::array<char, sizeof(T)> buf;
  std::memcpy(buf.data(), p, sizeof(T));
  if (swap) std::reverse(buf.begin(), buf.end());
  T value;
  std::memcpy(&value, buf.data(), sizeof(T));
  return value;
}

// Always little-endian on disk.
template <typename T>
void store_le(char* p, T value) {
  std::array<char, sizeof(T)> buf;
  std::memcpy(buf.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
  std::memcpy(p, buf.data(), sizeof(T));
}

std::size_t scalar_bytes(ScalarType type) {
  switch (type) {
    case ScalarType::kUint8: return 1;
    case ScalarType::kInt16: return 2;
    case ScalarType::kFloat32: return 4;
  }
  return 0;
}

bool is_supported_type(std::int64_t code) { return code == 2 || code == 4 || code == 16; }

std::string_view type_name(ScalarType type) {
  switch (type) {
    case ScalarType::kUint8: return "uint8";
    case ScalarType::kInt16: return "int16";
    case ScalarType::kFloat32: return "float32";
  }
  return "?";
}

ScalarType type_from_name(const std::string& name) {
  if (name == "uint8") return ScalarType::kUint8;
  if (name == "int16") return ScalarType::kInt16;
  if (name == "float32") return ScalarType::kFloat32;
  fail(ErrorCode::kUnsupportedDatatype, "raw dtype '" + name + "' not in {uint8, int16, float32}");
}

std::vector<double> decode_payload(const char* data, std::int64_t count, ScalarType type,
                                   bool swap) {
  std::vector<double> out(static_cast<std::size_t>(count));
  const std::size_t step = scalar_bytes(type);
  for (std::int64_t n = 0; n < count; ++n) {
    const char* p = data + static_cast<std::size_t>(n) * step;
    switch (type) {
      case ScalarType::kUint8:
        out[n] = static_cast<unsigned char>(*p);
        break;
      case ScalarType::kInt16:
        out[n] = load_scalar<std::int16_t>(p, swap);
        break;
      case ScalarType::kFloat32:
        out[n] = load_scalar<float>(p, swap);
        break;
    }
  }
  return out;
}

bool is_nifti_path(const fs::path& path) {
  auto ext = path.extension().string();
  return ext == ".nii" || ext == ".hdr";
}

bool is_raw_path(const fs::path& path) { return path.extension() == ".rawvol"; }

fs::path sidecar_path(const fs::path& path) { return fs::path(path.string() + ".json"); }

bool near(double a, double b) {
  return std::abs(a - b) <= 1e-5 * std::max({1.0, std::abs(a), std::abs(b)});
}

ScalarVolume read_nifti(const fs::path& path, const LoadOptions& options) {
  const std::vector<char> bytes = read_file(path);
  if (bytes.size() < static_cast<std::size_t>(kNiftiHeaderSize)) {
    fail(ErrorCode::kTruncatedData, "'" + path.string() + "' is shorter than a NIfTI-1 header");
  }
  const char* h = bytes.data();
  const bool single_file = std::memcmp(h + kOffMagic, "n+1\0", 4) == 0;
  const bool pair_file = std::memcmp(h + kOffMagic, "ni1\0", 4) == 0;
  if (!single_file && !pair_file) {
    fail(ErrorCode::kBadMagic, "'" + path.string() + "' has no NIfTI-1 magic");
  }
  bool swap = false;
  if (load_scalar<std::int32_t>(h, false) != kNiftiHeaderSize) {
    if (load_scalar<std::int32_t>(h, true) != kNiftiHeaderSize) {
      fail(ErrorCode::kBadMagic, "'" + path.string() + "' has sizeof_hdr != 348");
    }
    swap = true;
  }

  std::array<std::int16_t, 8> dim{};
  for (int a = 0; a < 8; ++a) dim[a] = load_scalar<std::int16_t>(h + kOffDim + 2 * a, swap);
  if (dim[0] < 3 || dim[0] > 7) {
    fail(ErrorCode::kDimMismatch, "NIfTI dim[0] = " + std::to_string(dim[0]) + ", need a 3D volume");
  }
  for (int a = 1; a <= 3; ++a) {
    if (dim[a] < 1) fail(ErrorCode::kDimMismatch, "NIfTI spatial dim " + std::to_string(a) + " < 1");
  }
  for (int a = 4; a <= dim[0]; ++a) {
    if (dim[a] != 1) {
      fail(ErrorCode::kDimMismatch,
           "NIfTI axis " + std::to_string(a) + " has size " + std::to_string(dim[a]) + ", expected 1");
    }
  }

  const std::int16_t datatype = load_scalar<std::int16_t>(h + kOffDatatype, swap);
  if (!is_supported_type(datatype)) {
    fail(ErrorCode::kUnsupportedDatatype,
         "NIfTI datatype " + std::to_string(datatype) + " not in {2, 4, 16}");
  }
  const auto type = static_cast<ScalarType>(datatype);
  const std::int16_t bitpix = load_scalar<std::int16_t>(h + kOffBitpix, swap);
  if (static_cast<std::size_t>(bitpix) != 8 * scalar_bytes(type)) {
    fail(ErrorCode::kUnsupportedDatatype, "NIfTI bitpix " + std::to_string(bitpix) +
                                              " inconsistent with datatype " + std::to_string(datatype));
  }

  std::array<float, 8> pixdim{};
  for (int a = 0; a < 8; ++a) pixdim[a] = load_scalar<float>(h + kOffPixdim + 4 * a, swap);

  VolumeGeometry geometry;
  geometry.dims = {dim[1], dim[2], dim[3]};
  for (int a = 0; a < 3; ++a) {
    const double s = options.ignore_orientation ? std::abs(pixdim[a + 1]) : pixdim[a + 1];
    if (!(s > 0.0) || !std::isfinite(s)) {
      fail(ErrorCode::kDimMismatch, "NIfTI pixdim[" + std::to_string(a + 1) + "] must be > 0");
    }
    geometry.spacing[a] = s;
  }

  // Orientation: only pure translations are accepted unless told otherwise.
  // NIfTI offsets locate the center of voxel (0,0,0); origin is its corner.
  const std::int16_t qform_code = load_scalar<std::int16_t>(h + kOffQformCode, swap);
  const std::int16_t sform_code = load_scalar<std::int16_t>(h + kOffSformCode, swap);
  Vec3 first_center = Vec3::Zero();
  if (sform_code > 0) {
    Eigen::Matrix<double, 3, 4> srow;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        srow(r, c) = load_scalar<float>(h + kOffSrow + 16 * r + 4 * c, swap);
      }
    }
    if (!options.ignore_orientation) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          const double expected = r == c ? geometry.spacing[r] : 0.0;
          if (!near(srow(r, c), expected)) {
            fail(ErrorCode::kUnsupportedOrientation,
                 "sform of '" + path.string() + "' is not a pure translation");
          }
        }
      }
    }
    first_center = srow.col(3);
  } else if (qform_code > 0) {
    const double b = load_scalar<float>(h + kOffQuatern, swap);
    const double c = load_scalar<float>(h + kOffQuatern + 4, swap);
    const double d = load_scalar<float>(h + kOffQuatern + 8, swap);
    const double qfac = pixdim[0];
    if (!options.ignore_orientation &&
        (std::abs(b) > 1e-6 || std::abs(c) > 1e-6 || std::abs(d) > 1e-6 || qfac < 0.0)) {
      fail(ErrorCode::kUnsupportedOrientation,
           "qform of '" + path.string() + "' is not a pure translation");
    }
    for (int a = 0; a < 3; ++a) first_center[a] = load_scalar<float>(h + kOffQoffset + 4 * a, swap);
  }
  geometry.origin = first_center - 0.5 * geometry.spacing;

  const float vox_offset_f = load_scalar<float>(h + kOffVoxOffset, swap);
  if (!std::isfinite(vox_offset_f) || vox_offset_f < 0.0f) {
    fail(ErrorCode::kTruncatedData, "invalid vox_offset");
  }
  auto vox_offset = static_cast<std::size_t>(vox_offset_f);
  const std::int64_t count = geometry.dims.count();
  const std::size_t payload = static_cast<std::size_t>(count) * scalar_bytes(type);

  std::vector<char> pair_data;
  const char* data = nullptr;
  if (single_file) {
    if (vox_offset < static_cast<std::size_t>(kNiftiHeaderSize)) vox_offset = kNiftiDataOffset;
    if (bytes.size() < vox_offset + payload) {
      fail(ErrorCode::kTruncatedData, "'" + path.string() + "' holds " + std::to_string(bytes.size()) +
                                          " bytes, need " + std::to_string(vox_offset + payload));
    }
    data = bytes.data() + vox_offset;
  } else {
    fs::path image = path;
    image.replace_extension(".img");
    pair_data = read_file(image);
    if (pair_data.size() < vox_offset + payload) {
      fail(ErrorCode::kTruncatedData, "'" + image.string() + "' is shorter than its payload");
    }
    data = pair_data.data() + vox_offset;
  }

  ScalarVolume out;
  out.geometry = geometry;
  out.stored_type = type;
  out.values = decode_payload(data, count, type, swap);

  double slope = load_scalar<float>(h + kOffSclSlope, swap);
  double inter = load_scalar<float>(h + kOffSclInter, swap);
  if (slope != 0.0 && std::isfinite(slope)) {
    if (!std::isfinite(inter)) inter = 0.0;
    if (slope != 1.0 || inter != 0.0) {
      for (double& v : out.values) v = v * slope + inter;
    }
  }
  return out;
}

ScalarVolume read_raw(const fs::path& path) {
  const fs::path side = sidecar_path(path);
  const std::vector<char> side_bytes = read_file(side);
  json meta;
  try {
    meta = json::parse(side_bytes.begin(), side_bytes.end());
    ScalarVolume out;
    const auto dims = meta.at("dims").get<std::vector<std::int64_t>>();
    const auto spacing = meta.at("spacing").get<std::vector<double>>();
    const auto origin = meta.value("origin", std::vector<double>{0.0, 0.0, 0.0});
    if (dims.size() != 3 || spacing.size() != 3 || origin.size() != 3) {
      fail(ErrorCode::kDimMismatch, "raw sidecar dims/spacing/origin must have 3 entries");
    }
    out.geometry.dims = {dims[0], dims[1], dims[2]};
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
      fail(ErrorCode::kDimMismatch, "raw sidecar dims must be >= 1");
    }
    for (int a = 0; a < 3; ++a) {
      if (!(spacing[a] > 0.0)) fail(ErrorCode::kDimMismatch, "raw sidecar spacing must be > 0");
      out.geometry.spacing[a] = spacing[a];
      out.geometry.origin[a] = origin[a];
    }
    out.stored_type = type_from_name(meta.at("dtype").get<std::string>());

    const std::vector<char> payload = read_file(path);
    const std::int64_t count = out.geometry.dims.count();
    const std::size_t expected = static_cast<std::size_t>(count) * scalar_bytes(out.stored_type);
    if (payload.size() < expected) {
      fail(ErrorCode::kTruncatedData, "'" + path.string() + "' holds " + std::to_string(payload.size()) +
                                          " bytes, need " + std::to_string(expected));
    }
    if (payload.size() > expected) {
      fail(ErrorCode::kDimMismatch, "'" + path.string() + "' is longer than dims imply");
    }
    out.values = decode_payload(payload.data(), count, out.stored_type,
                                std::endian::native == std::endian::big);
    return out;
  } catch (const json::exception& e) {
    fail(ErrorCode::kDimMismatch, "malformed raw sidecar '" + side.string() + "': " + e.what());
  }
}

void check_representable(std::span<const double> values, ScalarType type) {
  double lo = 0.0;
  double hi = 0.0;
  if (type == ScalarType::kUint8) {
    hi = 255.0;
  } else if (type == ScalarType::kInt16) {
    lo = -32768.0;
    hi = 32767.0;
  } else {
    return;
  }
  for (double v : values) {
    if (v != std::floor(v) || v < lo || v > hi) {
      fail(ErrorCode::kInvalidArgument, "value " + std::to_string(v) + " not representable as " +
                                            std::string(type_name(type)));
    }
  }
}

std::vector<char> encode_payload(std::span<const double> values, ScalarType type) {
  const std::size_t step = scalar_bytes(type);
  std::vector<char> out(values.size() * step);
  for (std::size_t n = 0; n < values.size(); ++n) {
    char* p = out.data() + n * step;
    switch (type) {
      case ScalarType::kUint8:
        *p = static_cast<char>(static_cast<unsigned char>(values[n]));
        break;
      case ScalarType::kInt16:
        store_le(p, static_cast<std::int16_t>(values[n]));
        break;
      case ScalarType::kFloat32:
        store_le(p, static_cast<float>(values[n]));
        break;
    }
  }
  return out;
}

void write_nifti(const fs::path& path, const VolumeGeometry& geometry,
                 std::span<const double> values, ScalarType type) {
  if (geometry.dims.x > std::numeric_limits<std::int16_t>::max() ||
      geometry.dims.y > std::numeric_limits<std::int16_t>::max() ||
      geometry.dims.z > std::numeric_limits<std::int16_t>::max()) {
    fail(ErrorCode::kInvalidArgument, "volume too large for NIfTI-1 dims");
  }
  std::vector<char> bytes(kNiftiDataOffset, 0);
  char* h = bytes.data();
  store_le<std::int32_t>(h, kNiftiHeaderSize);
  const std::array<std::int16_t, 8> dim = {3,
                                           static_cast<std::int16_t>(geometry.dims.x),
                                           static_cast<std::int16_t>(geometry.dims.y),
                                           static_cast<std::int16_t>(geometry.dims.z),
                                           1, 1, 1, 1};
  for (int a = 0; a < 8; ++a) store_le(h + kOffDim + 2 * a, dim[a]);
  store_le(h + kOffDatatype, static_cast<std::int16_t>(type));
  store_le(h + kOffBitpix, static_cast<std::int16_t>(8 * scalar_bytes(type)));
  std::array<float, 8> pixdim = {1.0f,
                                 static_cast<float>(geometry.spacing.x()),
                                 static_cast<float>(geometry.spacing.y()),
                                 static_cast<float>(geometry.spacing.z()),
                                 1.0f, 1.0f, 1.0f, 1.0f};
  for (int a = 0; a < 8; ++a) store_le(h + kOffPixdim + 4 * a, pixdim[a]);
  store_le(h + kOffVoxOffset, static_cast<float>(kNiftiDataOffset));
  store_le(h + kOffSclSlope, 1.0f);
  store_le(h + kOffSclInter, 0.0f);
  h[kOffXyztUnits] = 2;  // mm
  store_le<std::int16_t>(h + kOffQformCode, 1);
  const Vec3 first_center = geometry.origin + 0.5 * geometry.spacing;
  for (int a = 0; a < 3; ++a) store_le(h + kOffQoffset + 4 * a, static_cast<float>(first_center[a]));
  std::memcpy(h + kOffMagic, "n+1\0", 4);

  const std::vector<char> payload = encode_payload(values, type);
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  write_file(path, bytes);
}

void write_raw(const fs::path& path, const VolumeGeometry& geometry,
               std::span<const double> values, ScalarType type) {
  json meta;
  meta["dims"] = {geometry.dims.x, geometry.dims.y, geometry.dims.z};
  meta["spacing"] = {geometry.spacing.x(), geometry.spacing.y(), geometry.spacing.z()};
  meta["origin"] = {geometry.origin.x(), geometry.origin.y(), geometry.origin.z()};
  meta["dtype"] = type_name(type);
  const std::string text = meta.dump(2) + "\n";
  write_file(path, encode_payload(values, type));
  write_file(sidecar_path(path), std::vector<char>(text.begin(), text.end()));
}

std::vector<std::uint8_t> map_codes(const ScalarVolume& raw, const LabelCodeMap& codes) {
  std::vector<std::uint8_t> categories(raw.values.size());
  for (std::size_t n = 0; n < raw.values.size(); ++n) {
    const double v = raw.values[n];
    if (v != std::floor(v)) {
      fail(ErrorCode::kUnknownLabelCode, "non-integral label value " + std::to_string(v));
    }
    auto it = codes.find(static_cast<std::int64_t>(v));
    if (it == codes.end()) {
      fail(ErrorCode::kUnknownLabelCode, "label code " + std::to_string(static_cast<std::int64_t>(v)) +
                                             " has no category mapping");
    }
    if (it->second >= kCategoryCount) {
      fail(ErrorCode::kUnknownLabelCode, "label code map targets category outside {0, 1, 2}");
    }
    categories[n] = it->second;
  }
  return categories;
}

}  // namespace

ScalarVolume read_scalar_volume(const fs::path& path, const LoadOptions& options) {
  if (is_raw_path(path)) return read_raw(path);
  if (is_nifti_path(path)) return read_nifti(path, options);
  if (path.extension() == ".gz") {
    fail(ErrorCode::kUnsupportedDatatype, "compressed NIfTI is not supported: '" + path.string() + "'");
  }
  fail(ErrorCode::kInvalidArgument, "unrecognized volume extension: '" + path.string() + "'");
}

void write_scalar_volume(const fs::path& path, const VolumeGeometry& geometry,
                         std::span<const double> values, ScalarType type) {
  geometry.validate();
  if (static_cast<std::int64_t>(values.size()) != geometry.dims.count()) {
    fail(ErrorCode::kDimMismatch, "value count does not match dims");
  }
  check_representable(values, type);
  if (is_raw_path(path)) {
    write_raw(path, geometry, values, type);
  } else if (is_nifti_path(path) && path.extension() == ".nii") {
    write_nifti(path, geometry, values, type);
  } else {
    fail(ErrorCode::kInvalidArgument, "can only write .nii or .rawvol: '" + path.string() + "'");
  }
}

CtVolume load_ct(const fs::path& path, const LoadOptions& options) {
  ScalarVolume raw = read_scalar_volume(path, options);
  std::vector<float> hu(raw.values.size());
  for (std::size_t n = 0; n < hu.size(); ++n) hu[n] = static_cast<float>(raw.values[n]);
  return CtVolume(raw.geometry, std::move(hu));
}

void write_ct(const CtVolume& volume, const fs::path& path) {
  const std::vector<double> values(volume.values().begin(), volume.values().end());
  write_scalar_volume(path, volume.geometry(), values, ScalarType::kFloat32);
}

LabelCodeMap default_label_codes() { return {{0, 0}, {1, 1}, {2, 1}, {3, 2}}; }

LabelCodeMap identity_label_codes() { return {{0, 0}, {1, 1}, {2, 2}}; }

LabelVolume load_labels(const fs::path& path, const CtVolume& paired, const LabelCodeMap& codes,
                        const LoadOptions& options) {
  ScalarVolume raw = read_scalar_volume(path, options);
  if (raw.geometry.dims != paired.dims() || !same_spacing(raw.geometry.spacing, paired.spacing())) {
    std::ostringstream msg;
    msg << "mask '" << path.string() << "' dims (" << raw.geometry.dims.x << ", "
        << raw.geometry.dims.y << ", " << raw.geometry.dims.z << ") or spacing differ from CT ("
        << paired.dims().x << ", " << paired.dims().y << ", " << paired.dims().z << ")";
    fail(ErrorCode::kGeometryMismatch, msg.str());
  }
  VolumeGeometry geometry = raw.geometry;
  geometry.origin = paired.origin();
  return LabelVolume(geometry, map_codes(raw, codes));
}

LabelVolume load_labels(const fs::path& path, const LabelCodeMap& codes, const LoadOptions& options) {
  ScalarVolume raw = read_scalar_volume(path, options);
  return LabelVolume(raw.geometry, map_codes(raw, codes));
}

void write_labels(const LabelVolume& labels, const fs::path& path) {
  static constexpr std::array<double, kCategoryCount> kCodeFor = {0.0, 1.0, 3.0};
  std::vector<double> codes(labels.categories().size());
  for (std::size_t n = 0; n < codes.size(); ++n) codes[n] = kCodeFor[labels.categories()[n]];
  write_scalar_volume(path, labels.geometry(), codes, ScalarType::kUint8);
}

}  // namespace drr
