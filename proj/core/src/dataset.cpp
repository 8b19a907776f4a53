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

#include "drr/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "drr/error.hpp"
#include "drr/parallel.hpp"

namespace drr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string index_string(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return buf;
}

json weights_to_json(const ClassWeights& w) { return json::array({w.w0, w.w1, w.w2}); }

ClassWeights weights_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) fail(ErrorCode::kInvalidArgument, "class weights need exactly 3 numbers");
  return {v[0], v[1], v[2]};
}

json thresholds_to_json(const LabelThresholds& t) { return {{"t1", t.t1}, {"t2", t.t2}}; }

LabelThresholds thresholds_from_json(const json& j) {
  if (j.is_number()) return {0.0, j.get<double>()};
  LabelThresholds t;
  for (const auto& [key, value] : j.items()) {
    if (key == "t1") {
      t.t1 = value.get<double>();
    } else if (key == "t2") {
      t.t2 = value.get<double>();
    } else {
      fail(ErrorCode::kInvalidArgument, "unknown threshold key '" + key + "'");
    }
  }
  return t;
}

json pose_to_json(const RigidPose& p) {
  return json::array({p.translation.x(), p.translation.y(), p.translation.z(),
                      p.rotation_deg.x(), p.rotation_deg.y(), p.rotation_deg.z()});
}

RigidPose pose_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 6) fail(ErrorCode::kInvalidArgument, "pose needs 6 numbers");
  RigidPose p;
  p.translation = Vec3(v[0], v[1], v[2]);
  p.rotation_deg = Vec3(v[3], v[4], v[5]);
  return p;
}

json config_to_json(const DatasetConfig& c, bool include_output) {
  json j;
  json cases = json::array();
  for (const CaseSpec& cs : c.cases) {
    cases.push_back({{"id", cs.id}, {"ct", cs.ct.generic_string()}, {"labels", cs.labels.generic_string()}});
  }
  j["cases"] = cases;
  json codes = json::object();
  for (const auto& [code, category] : c.label_codes) codes[std::to_string(code)] = category;
  j["label_codes"] = codes;
  j["ignore_orientation"] = c.ignore_orientation;
  json wg = json::array();
  for (const auto& w : c.weight_grid) wg.push_back(weights_to_json(w));
  j["weight_grid"] = wg;
  json tg = json::array();
  for (const auto& t : c.threshold_grid) tg.push_back(thresholds_to_json(t));
  j["threshold_grid"] = tg;
  j["normal_weights"] = weights_to_json(c.normal_weights);
  j["normal_phase"] = c.normal_phase;
  j["per_case_per_view"] = c.per_case_per_view;
  json views = json::array();
  for (View v : c.views) views.push_back(std::string(to_string(v)));
  j["views"] = views;
  j["pose_ranges"] = {{"translation_bound", c.pose_ranges.translation_bound},
                      {"rotation_bound", c.pose_ranges.rotation_bound}};
  j["geometry"] = {{"source_to_detector", c.geometry.source_to_detector},
                   {"source_to_isocenter", c.geometry.source_to_isocenter},
                   {"detector_size", {c.geometry.rows, c.geometry.cols}},
                   {"pixel_pitch", {c.geometry.row_pitch, c.geometry.col_pitch}}};
  j["intensity_mode"] = std::string(to_string(c.intensity_mode));
  j["normalization"] = std::string(to_string(c.normalization));
  if (c.window.automatic) {
    j["window"] = "auto";
  } else {
    j["window"] = {{"lo", c.window.lo}, {"hi", c.window.hi}};
  }
  j["write_float"] = c.write_float;
  j["base_seed"] = c.base_seed;
  if (include_output) j["output_dir"] = c.output_dir.generic_string();
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorCode::kIoFailure, "write error on '" + path.string() + "'");
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoFailure, "cannot create '" + dir.string() + "': " + ec.message());
}

void copy_over(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
  if (ec) fail(ErrorCode::kIoFailure, "cannot copy to '" + to.string() + "': " + ec.message());
}

struct RenderTask {
  Phase phase;
  std::size_t weight_index;  // unused for normal renders
  std::size_t view_index;
  int index;
};

// Renders every requested cell for one case. Returns records per cell
// (weight-major, threshold-minor), each in (phase, view, index) order.
std::vector<std::vector<DatasetRecord>> build_cells(
    const CtVolume& ct, const LabelVolume& labels, std::string_view case_id,
    const DatasetConfig& config, const std::vector<ClassWeights>& weight_grid,
    const std::vector<LabelThresholds>& threshold_grid, unsigned jobs) {
  require_paired(ct, labels);
  const std::size_t n_views = config.views.size();
  const auto per_view = static_cast<std::size_t>(config.per_case_per_view);
  const std::size_t phases = config.normal_phase ? 2 : 1;
  const std::size_t per_cell = phases * n_views * per_view;
  const std::size_t n_thresholds = threshold_grid.size();

  std::vector<std::vector<DatasetRecord>> cells(weight_grid.size() * n_thresholds,
                                                std::vector<DatasetRecord>(per_cell));
  std::vector<fs::path> cell_dirs(cells.size());
  std::vector<std::string> cell_prefix(cells.size());
  for (std::size_t w = 0; w < weight_grid.size(); ++w) {
    for (std::size_t t = 0; t < n_thresholds; ++t) {
      const std::size_t c = w * n_thresholds + t;
      cell_prefix[c] = cell_name(weight_grid[w], threshold_grid[t]) + "/" + std::string(case_id) + "/";
      cell_dirs[c] = config.output_dir / cell_name(weight_grid[w], threshold_grid[t]) / std::string(case_id);
      make_dirs(cell_dirs[c]);
    }
  }

  std::vector<RenderTask> tasks;
  if (config.normal_phase) {
    for (std::size_t v = 0; v < n_views; ++v) {
      for (int i = 0; i < config.per_case_per_view; ++i) tasks.push_back({Phase::kNormal, 0, v, i});
    }
  }
  for (std::size_t w = 0; w < weight_grid.size(); ++w) {
    for (std::size_t v = 0; v < n_views; ++v) {
      for (int i = 0; i < config.per_case_per_view; ++i) {
        tasks.push_back({Phase::kInfectionAware, w, v, i});
      }
    }
  }

  auto run_task = [&](const RenderTask& task) {
    const View view = config.views[task.view_index];
    const std::uint64_t seed = record_seed(config.base_seed, case_id, view, task.phase, task.index);
    const RigidPose pose = sample_pose(seed, config.pose_ranges);
    ImagingGeometry geometry = config.geometry;
    geometry.view = view;

    RenderOptions options;
    options.weights = task.phase == Phase::kNormal ? config.normal_weights : weight_grid[task.weight_index];
    options.mode = config.intensity_mode;
    options.normalization = config.normalization;
    options.threads = 1;
    DrrImage image = render(ct, labels, pose, geometry, options);
    const Gray8Image png = export_image(image, config.window);

    const std::string stem = std::string(task.phase == Phase::kNormal ? "normal" : "aware") + "_" +
                             std::string(to_string(view)) + "_" + index_string(task.index);
    const std::size_t slot = (config.normal_phase && task.phase == Phase::kInfectionAware ? 1 : 0) *
                                 n_views * per_view +
                             task.view_index * per_view + static_cast<std::size_t>(task.index);

    std::size_t w_begin = task.weight_index;
    std::size_t w_end = task.weight_index + 1;
    if (task.phase == Phase::kNormal) {
      w_begin = 0;
      w_end = weight_grid.size();
    }
    fs::path first_image;
    fs::path first_raw;
    fs::path first_mask;
    for (std::size_t w = w_begin; w < w_end; ++w) {
      for (std::size_t t = 0; t < n_thresholds; ++t) {
        const std::size_t c = w * n_thresholds + t;
        DatasetRecord& rec = cells[c][slot];
        rec.case_id = std::string(case_id);
        rec.view = view;
        rec.phase = task.phase;
        rec.index = task.index;
        rec.seed = seed;
        rec.pose = pose;
        rec.weights = options.weights;
        rec.thresholds = threshold_grid[t];
        rec.image = cell_prefix[c] + stem + ".png";
        rec.mask = cell_prefix[c] + stem + "_mask.png";
        if (config.write_float) rec.raw = cell_prefix[c] + stem + ".f64";

        const fs::path image_path = cell_dirs[c] / (stem + ".png");
        const fs::path mask_path = cell_dirs[c] / (stem + "_mask.png");
        if (first_image.empty()) {
          write_png(image_path, png);
          first_image = image_path;
          if (config.write_float) {
            first_raw = cell_dirs[c] / (stem + ".f64");
            write_raw_f64(first_raw, image.intensity);
          }
        } else {
          copy_over(first_image, image_path);
          if (config.write_float) copy_over(first_raw, cell_dirs[c] / (stem + ".f64"));
        }
        if (task.phase == Phase::kNormal) {
          // Normal renders are negative examples: the mask is all background.
          if (first_mask.empty()) {
            write_png(mask_path, Gray8Image{image.rows, image.cols,
                                            std::vector<std::uint8_t>(image.size(), 0)});
            first_mask = mask_path;
          } else {
            copy_over(first_mask, mask_path);
          }
        } else {
          relabel(image, threshold_grid[t]);
          write_png(mask_path, export_mask(image));
        }
      }
    }
  };

  parallel_for_blocks(static_cast<std::int64_t>(tasks.size()), jobs,
                      [&](std::int64_t begin, std::int64_t end) {
                        for (std::int64_t n = begin; n < end; ++n) run_task(tasks[static_cast<std::size_t>(n)]);
                      });
  return cells;
}

std::string case_id_from_path(const fs::path& path) {
  std::string name = path.filename().string();
  for (std::string_view ext : {".rawvol", ".nii", ".hdr"}) {
    if (name.size() > ext.size() && name.ends_with(ext)) {
      name.resize(name.size() - ext.size());
      break;
    }
  }
  return name;
}

json record_to_json(const DatasetRecord& r) {
  json j = {{"case_id", r.case_id},
            {"view", std::string(to_string(r.view))},
            {"phase", std::string(to_string(r.phase))},
            {"index", r.index},
            {"seed", r.seed},
            {"pose", pose_to_json(r.pose)},
            {"weights", weights_to_json(r.weights)},
            {"thresholds", thresholds_to_json(r.thresholds)},
            {"is_normal", r.is_normal()},
            {"image", r.image},
            {"mask", r.mask}};
  if (!r.raw.empty()) j["raw"] = r.raw;
  return j;
}

DatasetRecord record_from_json(const json& j) {
  DatasetRecord r;
  r.case_id = j.at("case_id").get<std::string>();
  r.view = view_from_string(j.at("view").get<std::string>());
  const auto phase = j.at("phase").get<std::string>();
  r.phase = phase == "normal" ? Phase::kNormal : Phase::kInfectionAware;
  r.index = j.at("index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.pose = pose_from_json(j.at("pose"));
  r.weights = weights_from_json(j.at("weights"));
  r.thresholds = thresholds_from_json(j.at("thresholds"));
  r.image = j.at("image").get<std::string>();
  r.mask = j.at("mask").get<std::string>();
  r.raw = j.value("raw", std::string());
  return r;
}

}  // namespace

std::string_view artifact_version() {
#ifdef DRR_VERSION_STRING
  return DRR_VERSION_STRING;
#else
  return "0.0.0";
#endif
}

std::vector<ClassWeights> default_weight_grid() {
  return {{12.0, 12.0, 1.0}, {6.0, 6.0, 1.0}, {3.0, 3.0, 1.0},
          {1.5, 1.5, 1.0},   {1.0, 1.0, 1.0}, {1.0, 1.0, 1.5},
          {1.0, 1.0, 3.0},   {1.0, 1.0, 6.0}, {1.0, 1.0, 12.0}};
}

std::vector<LabelThresholds> default_threshold_grid() {
  std::vector<LabelThresholds> grid;
  for (double t2 : {0.00, 0.01, 0.05, 0.10, 0.15, 0.20, 0.40}) grid.push_back({0.0, t2});
  return grid;
}

void DatasetConfig::validate() const {
  if (cases.empty()) fail(ErrorCode::kEmptyDataset, "dataset config lists no cases");
  std::set<std::string> ids;
  for (const CaseSpec& c : cases) {
    if (c.id.empty() || c.id.find('/') != std::string::npos) {
      fail(ErrorCode::kInvalidArgument, "case id '" + c.id + "' must be a non-empty file name");
    }
    if (!ids.insert(c.id).second) fail(ErrorCode::kInvalidArgument, "duplicate case id '" + c.id + "'");
  }
  if (weight_grid.empty() || threshold_grid.empty()) {
    fail(ErrorCode::kInvalidArgument, "weight and threshold grids must be non-empty");
  }
  std::set<std::string> names;
  for (const auto& w : weight_grid) {
    w.validate();
    for (const auto& t : threshold_grid) {
      t.validate();
      if (!names.insert(cell_name(w, t)).second) {
        fail(ErrorCode::kInvalidArgument, "grid cell '" + cell_name(w, t) + "' appears twice");
      }
    }
  }
  normal_weights.validate();
  if (per_case_per_view < 1) fail(ErrorCode::kInvalidArgument, "per_case_per_view must be >= 1");
  if (views.empty()) fail(ErrorCode::kInvalidArgument, "at least one view is required");
  if (std::set<View>(views.begin(), views.end()).size() != views.size()) {
    fail(ErrorCode::kInvalidArgument, "views must not repeat");
  }
  pose_ranges.validate();
  geometry.validate();
  if (!window.automatic && !(window.hi > window.lo)) {
    fail(ErrorCode::kInvalidArgument, "fixed window needs lo < hi");
  }
}

DatasetConfig dataset_config_from_json(std::string_view text, const fs::path& base_dir) {
  DatasetConfig c;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  try {
    const json j = json::parse(text);
    if (!j.is_object()) fail(ErrorCode::kInvalidArgument, "dataset config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "cases") {
        for (const json& item : value) {
          CaseSpec cs;
          cs.ct = resolve(item.at("ct").get<std::string>());
          cs.labels = resolve(item.at("labels").get<std::string>());
          cs.id = item.contains("id") ? item.at("id").get<std::string>() : case_id_from_path(cs.ct);
          c.cases.push_back(std::move(cs));
        }
      } else if (key == "label_codes") {
        c.label_codes.clear();
        for (const auto& [code, category] : value.items()) {
          c.label_codes[std::stoll(code)] = category.get<std::uint8_t>();
        }
      } else if (key == "ignore_orientation") {
        c.ignore_orientation = value.get<bool>();
      } else if (key == "weight_grid") {
        c.weight_grid.clear();
        for (const json& w : value) c.weight_grid.push_back(weights_from_json(w));
      } else if (key == "threshold_grid") {
        c.threshold_grid.clear();
        for (const json& t : value) c.threshold_grid.push_back(thresholds_from_json(t));
      } else if (key == "normal_weights") {
        c.normal_weights = weights_from_json(value);
      } else if (key == "normal_phase") {
        c.normal_phase = value.get<bool>();
      } else if (key == "per_case_per_view") {
        c.per_case_per_view = value.get<int>();
      } else if (key == "views") {
        c.views.clear();
        for (const json& v : value) c.views.push_back(view_from_string(v.get<std::string>()));
      } else if (key == "pose_ranges") {
        c.pose_ranges.translation_bound = value.value("translation_bound", c.pose_ranges.translation_bound);
        c.pose_ranges.rotation_bound = value.value("rotation_bound", c.pose_ranges.rotation_bound);
      } else if (key == "geometry") {
        for (const auto& [gk, gv] : value.items()) {
          if (gk == "source_to_detector") {
            c.geometry.source_to_detector = gv.get<double>();
          } else if (gk == "source_to_isocenter") {
            c.geometry.source_to_isocenter = gv.get<double>();
          } else if (gk == "detector_size") {
            const auto size = gv.get<std::vector<std::int64_t>>();
            if (size.size() != 2) fail(ErrorCode::kInvalidArgument, "detector_size needs [rows, cols]");
            c.geometry.rows = size[0];
            c.geometry.cols = size[1];
          } else if (gk == "pixel_pitch") {
            const auto pitch = gv.get<std::vector<double>>();
            if (pitch.size() != 2) fail(ErrorCode::kInvalidArgument, "pixel_pitch needs [row, col]");
            c.geometry.row_pitch = pitch[0];
            c.geometry.col_pitch = pitch[1];
          } else {
            fail(ErrorCode::kInvalidArgument, "unknown geometry key '" + gk + "'");
          }
        }
      } else if (key == "intensity_mode") {
        c.intensity_mode = intensity_mode_from_string(value.get<std::string>());
      } else if (key == "normalization") {
        c.normalization = weight_normalization_from_string(value.get<std::string>());
      } else if (key == "window") {
        if (value.is_string() && value.get<std::string>() == "auto") {
          c.window = Window::Auto();
        } else if (value.is_object()) {
          c.window = Window::Fixed(value.at("lo").get<double>(), value.at("hi").get<double>());
        } else {
          fail(ErrorCode::kInvalidArgument, "window must be \"auto\" or {\"lo\", \"hi\"}");
        }
      } else if (key == "write_float") {
        c.write_float = value.get<bool>();
      } else if (key == "base_seed") {
        c.base_seed = value.get<std::uint64_t>();
      } else if (key == "output_dir") {
        c.output_dir = resolve(value.get<std::string>());
      } else {
        fail(ErrorCode::kInvalidArgument, "unknown dataset config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed dataset config: ") + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::kInvalidArgument, "label_codes keys must be integers");
  }
  return c;
}

DatasetConfig load_dataset_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open dataset config '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return dataset_config_from_json(text, path.parent_path());
}

std::string dataset_config_to_json(const DatasetConfig& config) {
  return config_to_json(config, true).dump(2) + "\n";
}

std::string config_hash(const DatasetConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a64(config_to_json(config, false).dump()));
  return buf;
}

std::string_view to_string(Phase phase) {
  return phase == Phase::kNormal ? "normal" : "infection_aware";
}

std::uint64_t record_seed(std::uint64_t base_seed, std::string_view case_id, View view,
                          Phase phase, int index) {
  std::string key(case_id);
  key += '\x1f';
  key += to_string(view);
  key += '\x1f';
  key += to_string(phase);
  key += '\x1f';
  key += std::to_string(index);
  return splitmix64(base_seed ^ fnv1a64(key));
}

std::string cell_name(const ClassWeights& weights, const LabelThresholds& thresholds) {
  return "w" + format_number(weights.w0) + "_" + format_number(weights.w1) + "_" +
         format_number(weights.w2) + "__t" + format_number(thresholds.t1) + "_" +
         format_number(thresholds.t2);
}

std::vector<DatasetRecord> build_case(const CtVolume& ct, const LabelVolume& labels,
                                      std::string_view case_id, const DatasetConfig& config,
                                      const ClassWeights& weights,
                                      const LabelThresholds& thresholds, unsigned jobs) {
  weights.validate();
  thresholds.validate();
  if (config.per_case_per_view < 1 || config.views.empty()) {
    fail(ErrorCode::kInvalidArgument, "need per_case_per_view >= 1 and at least one view");
  }
  return build_cells(ct, labels, case_id, config, {weights}, {thresholds}, jobs).front();
}

std::string Manifest::to_json() const {
  json header = {{"artifact_version", artifact_version},
                 {"config_hash", config_hash},
                 {"window", window},
                 {"base_seed", base_seed},
                 {"cells", cells},
                 {"record_count", records.size()}};
  json recs = json::array();
  for (const DatasetRecord& r : records) recs.push_back(record_to_json(r));
  return json{{"header", header}, {"records", recs}}.dump(2) + "\n";
}

Manifest Manifest::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    Manifest m;
    const json& h = j.at("header");
    m.artifact_version = h.at("artifact_version").get<std::string>();
    m.config_hash = h.at("config_hash").get<std::string>();
    m.window = h.at("window").get<std::string>();
    m.base_seed = h.at("base_seed").get<std::uint64_t>();
    m.cells = h.at("cells").get<std::vector<std::string>>();
    for (const json& r : j.at("records")) m.records.push_back(record_from_json(r));
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed manifest: ") + e.what());
  }
}

Manifest build_dataset(const DatasetConfig& config, unsigned jobs) {
  config.validate();
  make_dirs(config.output_dir);

  const std::size_t n_cells = config.weight_grid.size() * config.threshold_grid.size();
  // per_cell_case[cell][case] -> records
  std::vector<std::vector<std::vector<DatasetRecord>>> per_cell(n_cells);
  for (const CaseSpec& cs : config.cases) {
    LoadOptions load;
    load.ignore_orientation = config.ignore_orientation;
    const CtVolume ct = load_ct(cs.ct, load);
    const LabelVolume labels = load_labels(cs.labels, ct, config.label_codes, load);
    auto cells = build_cells(ct, labels, cs.id, config, config.weight_grid, config.threshold_grid, jobs);
    for (std::size_t c = 0; c < n_cells; ++c) per_cell[c].push_back(std::move(cells[c]));
  }

  Manifest manifest;
  manifest.artifact_version = std::string(artifact_version());
  manifest.config_hash = config_hash(config);
  manifest.window = config.window.describe();
  manifest.base_seed = config.base_seed;
  for (const auto& w : config.weight_grid) {
    for (const auto& t : config.threshold_grid) manifest.cells.push_back(cell_name(w, t));
  }
  for (auto& cell : per_cell) {
    for (auto& case_records : cell) {
      for (auto& r : case_records) manifest.records.push_back(std::move(r));
    }
  }
  write_text(config.output_dir / "manifest.json", manifest.to_json());
  return manifest;
}

}  // namespace drr
