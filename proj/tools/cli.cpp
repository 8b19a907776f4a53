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

#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "drr/analysis.hpp"
#include "drr/dataset.hpp"
#include "drr/error.hpp"
#include "drr/image_export.hpp"
#include "drr/projector.hpp"
#include "drr/volume_io.hpp"

namespace drr::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flag values detected after CLI11 has parsed.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_numbers(const std::string& text, std::size_t expected,
                                  const std::string& flag) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
  }
  if (values.size() != expected) {
    throw UsageError(flag + " expects " + std::to_string(expected) + " comma-separated values");
  }
  return values;
}

ClassWeights parse_weights(const std::string& text) {
  const auto v = parse_numbers(text, 3, "--weights");
  ClassWeights w{v[0], v[1], v[2]};
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) throw UsageError("--weights must all be > 0");
  }
  return w;
}

RigidPose parse_pose(const std::string& text) {
  const auto v = parse_numbers(text, 6, "--pose");
  RigidPose pose;
  pose.translation = Vec3(v[0], v[1], v[2]);
  pose.rotation_deg = Vec3(v[3], v[4], v[5]);
  return pose;
}

View parse_view(const std::string& text) {
  if (text == "front") return View::kFront;
  if (text == "lateral") return View::kLateral;
  throw UsageError("--view must be front or lateral");
}

IntensityMode parse_mode(const std::string& text) {
  if (text == "raw") return IntensityMode::kRawHu;
  if (text == "attenuation") return IntensityMode::kAttenuation;
  throw UsageError("--mode must be raw or attenuation");
}

Window parse_window(const std::string& text) {
  if (text == "auto") return Window::Auto();
  const auto v = parse_numbers(text, 2, "--window");
  if (!(v[1] > v[0])) throw UsageError("--window needs lo < hi");
  return Window::Fixed(v[0], v[1]);
}

double parse_threshold(double t, const std::string& flag) {
  if (!(t >= 0.0 && t <= 1.0)) throw UsageError(flag + " must lie in [0, 1]");
  return t;
}

struct GeometryFlags {
  std::string detector = "256,256";
  std::string pitch = "1.6,1.6";
  double sdd = 1800.0;
  double sid = 1400.0;
  std::string view = "front";

  void add_to(CLI::App* app) {
    app->add_option("--detector", detector, "Detector rows,cols")->capture_default_str();
    app->add_option("--pitch", pitch, "Pixel pitch row,col in mm")->capture_default_str();
    app->add_option("--sdd", sdd, "Source-to-detector distance (mm)")->capture_default_str();
    app->add_option("--sid", sid, "Source-to-isocenter distance (mm)")->capture_default_str();
    app->add_option("--view", view, "front | lateral")->capture_default_str();
  }

  ImagingGeometry build() const {
    ImagingGeometry g;
    const auto size = parse_numbers(detector, 2, "--detector");
    const auto p = parse_numbers(pitch, 2, "--pitch");
    if (size[0] < 1 || size[1] < 1 || size[0] != std::floor(size[0]) || size[1] != std::floor(size[1])) {
      throw UsageError("--detector needs positive integer rows,cols");
    }
    g.rows = static_cast<std::int64_t>(size[0]);
    g.cols = static_cast<std::int64_t>(size[1]);
    g.row_pitch = p[0];
    g.col_pitch = p[1];
    g.source_to_detector = sdd;
    g.source_to_isocenter = sid;
    g.view = parse_view(view);
    try {
      g.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return g;
  }
};

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorCode::kIoFailure, "write error on '" + path.string() + "'");
}

std::string case_id_for(const fs::path& ct) {
  std::string name = ct.filename().string();
  for (std::string_view ext : {".rawvol", ".nii", ".hdr"}) {
    if (name.size() > ext.size() && name.ends_with(ext)) {
      name.resize(name.size() - ext.size());
      break;
    }
  }
  return name;
}

// ---- info ------------------------------------------------------------------

struct InfoFlags {
  std::string ct;
  std::string labels;
  bool json_output = false;
  bool ignore_orientation = false;
};

int cmd_info(const InfoFlags& f, std::ostream& out) {
  LoadOptions load;
  load.ignore_orientation = f.ignore_orientation;
  const CtVolume ct = load_ct(f.ct, load);
  const auto [lo, hi] = ct.minmax();
  json j;
  j["ct"] = f.ct;
  j["dims"] = {ct.dims().x, ct.dims().y, ct.dims().z};
  j["spacing"] = {ct.spacing().x(), ct.spacing().y(), ct.spacing().z()};
  j["origin"] = {ct.origin().x(), ct.origin().y(), ct.origin().z()};
  j["hu_min"] = lo;
  j["hu_max"] = hi;

  std::optional<std::array<std::int64_t, kCategoryCount>> counts;
  std::optional<double> proportion;
  if (!f.labels.empty()) {
    const LabelVolume labels = load_labels(f.labels, ct, default_label_codes(), load);
    counts = labels.category_counts();
    j["labels"] = f.labels;
    j["category_counts"] = {{"background", (*counts)[0]}, {"lung", (*counts)[1]}, {"infection", (*counts)[2]}};
    if ((*counts)[1] + (*counts)[2] > 0) {
      proportion = infected_proportion(labels);
      j["infected_proportion"] = *proportion;
    } else {
      j["infected_proportion"] = nullptr;
    }
  }

  if (f.json_output) {
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  out << "ct: " << f.ct << "\n";
  out << "dims: " << ct.dims().x << " x " << ct.dims().y << " x " << ct.dims().z << "\n";
  out << "spacing (mm): " << ct.spacing().x() << ", " << ct.spacing().y() << ", " << ct.spacing().z()
      << "\n";
  out << "HU range: [" << lo << ", " << hi << "]\n";
  if (counts) {
    out << "voxels: background=" << (*counts)[0] << " lung=" << (*counts)[1]
        << " infection=" << (*counts)[2] << "\n";
    out << "p = " << (proportion ? format_fixed(*proportion, 3) : std::string("n/a (no lung region)"))
        << "\n";
  }
  return kExitOk;
}

// ---- render ----------------------------------------------------------------

struct RenderFlags {
  std::string ct;
  std::string labels;
  std::string weights = "1,1,1";
  double t1 = 0.0;
  double t2 = 0.0;
  std::string pose = "0,0,0,0,0,0";
  std::string out;
  std::string mask_out;
  std::string float_out;
  std::string mode = "attenuation";
  std::string normalization = "mean_weight";
  std::string window = "auto";
  unsigned jobs = 0;
  bool ignore_orientation = false;
  GeometryFlags geometry;
};

int cmd_render(const RenderFlags& f, std::ostream& out) {
  RenderOptions options;
  options.weights = parse_weights(f.weights);
  options.thresholds = {parse_threshold(f.t1, "--t1"), parse_threshold(f.t2, "--t2")};
  options.mode = parse_mode(f.mode);
  if (f.normalization != "mean_weight" && f.normalization != "length_weighted") {
    throw UsageError("--normalization must be mean_weight or length_weighted");
  }
  options.normalization = weight_normalization_from_string(f.normalization);
  options.threads = f.jobs;
  const RigidPose pose = parse_pose(f.pose);
  const ImagingGeometry geometry = f.geometry.build();
  const Window window = parse_window(f.window);

  LoadOptions load;
  load.ignore_orientation = f.ignore_orientation;
  const CtVolume ct = load_ct(f.ct, load);
  const LabelVolume labels = load_labels(f.labels, ct, default_label_codes(), load);
  const DrrImage image = render(ct, labels, pose, geometry, options);

  write_png(f.out, export_image(image, window));
  if (!f.mask_out.empty()) write_png(f.mask_out, export_mask(image));
  if (!f.float_out.empty()) write_raw_f64(f.float_out, image.intensity);

  std::array<std::int64_t, kCategoryCount> label_counts{};
  for (std::uint8_t l : image.label) ++label_counts[l];
  out << "wrote " << f.out << " (" << image.rows << "x" << image.cols << "), labels: background="
      << label_counts[0] << " lung=" << label_counts[1] << " infection=" << label_counts[2] << "\n";
  return kExitOk;
}

// ---- dataset ---------------------------------------------------------------

struct DatasetFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned jobs = 0;
};

int cmd_dataset(const DatasetFlags& f, std::ostream& out) {
  DatasetConfig config = load_dataset_config(f.config);
  if (f.seed) config.base_seed = *f.seed;
  if (!f.out_dir.empty()) config.output_dir = f.out_dir;
  const Manifest manifest = build_dataset(config, f.jobs);
  out << "built " << manifest.records.size() << " records in " << manifest.cells.size()
      << " grid cells under " << config.output_dir.string() << "\n";
  out << "manifest: " << (config.output_dir / "manifest.json").string() << "\n";
  return kExitOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeFlags {
  std::string ct;
  std::string labels;
  std::string weights_grid;
  int poses = 4;
  int bins = 50;
  std::uint64_t seed = 0;
  std::string out;
  std::string case_id;
  std::string mode = "attenuation";
  bool json_output = false;
  bool ignore_orientation = false;
  unsigned jobs = 0;
  GeometryFlags geometry;
};

std::vector<ClassWeights> load_weight_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open weight grid '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<ClassWeights> grid;
  try {
    json j = json::parse(text);
    if (j.is_object()) j = j.at("weight_grid");
    for (const json& w : j) {
      const auto v = w.get<std::vector<double>>();
      if (v.size() != 3) throw UsageError("weight grid entries need 3 numbers");
      grid.push_back({v[0], v[1], v[2]});
      if (!(v[0] > 0.0 && v[1] > 0.0 && v[2] > 0.0)) throw UsageError("weight grid entries must be > 0");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed weight grid: ") + e.what());
  }
  if (grid.empty()) throw UsageError("weight grid is empty");
  return grid;
}

std::string weights_tag(const ClassWeights& w) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "w%g_%g_%g", w.w0, w.w1, w.w2);
  return buf;
}

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out) {
  if (f.bins < 1) throw UsageError("--bins must be >= 1");
  if (f.poses < 1) throw UsageError("--poses must be >= 1");
  const IntensityMode mode = parse_mode(f.mode);
  const ImagingGeometry geometry = f.geometry.build();
  const std::vector<ClassWeights> grid =
      f.weights_grid.empty() ? default_weight_grid() : load_weight_grid(f.weights_grid);

  LoadOptions load;
  load.ignore_orientation = f.ignore_orientation;
  const CtVolume ct = load_ct(f.ct, load);
  const LabelVolume labels = load_labels(f.labels, ct, default_label_codes(), load);
  const std::string case_id = f.case_id.empty() ? case_id_for(f.ct) : f.case_id;
  const CaseStats stats = case_stats(case_id, labels, grid);

  std::vector<RigidPose> poses;
  const PoseRanges ranges;
  for (int i = 0; i < f.poses; ++i) {
    poses.push_back(sample_pose(record_seed(f.seed, case_id, geometry.view, Phase::kInfectionAware, i), ranges));
  }

  json j;
  j["case_id"] = stats.case_id;
  j["infected_voxels"] = stats.infected_voxels;
  j["lung_voxels"] = stats.lung_voxels;
  j["infected_proportion"] = stats.proportion;
  j["seed"] = f.seed;
  j["poses"] = f.poses;
  j["view"] = std::string(to_string(geometry.view));
  json eap = json::array();
  for (const auto& [w, e] : stats.eapiv_by_weights) {
    eap.push_back({{"weights", {w.w0, w.w1, w.w2}}, {"eapiv", e}});
  }
  j["eapiv"] = eap;

  const fs::path out_path(f.out);
  json hist = json::array();
  for (const ClassWeights& w : grid) {
    const CrivHistogram h = criv_histogram(ct, labels, poses, geometry, w, f.bins, mode, f.jobs);
    fs::path csv = out_path;
    csv.replace_filename(out_path.stem().string() + "_criv_" + weights_tag(w) + ".csv");
    write_text(csv, h.to_csv());
    hist.push_back({{"weights", {w.w0, w.w1, w.w2}},
                    {"bins", h.bins()},
                    {"population", "pixels with pi2 > 0"},
                    {"included", h.included()},
                    {"pixels_seen", h.pixels_seen},
                    {"mean", h.mean()},
                    {"counts", h.counts},
                    {"csv", csv.filename().string()}});
  }
  j["criv_histograms"] = hist;

  const std::string text = j.dump(2) + "\n";
  write_text(out_path, text);
  if (f.json_output) {
    out << text;
  } else {
    out << "case " << case_id << ": p = " << format_fixed(stats.proportion, 3) << ", "
        << grid.size() << " weight tuples, stats written to " << f.out << "\n";
  }
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kIoFailure:
      return kExitIo;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kEmptyDataset:
      return kExitUsage;
    default:
      return kExitData;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infection-aware DRR generation from labeled CT volumes", "drr"};
  app.require_subcommand(1);

  InfoFlags info;
  auto* info_cmd = app.add_subcommand("info", "Summarize a CT volume and optional label mask");
  info_cmd->add_option("--ct", info.ct, "CT volume (.nii or .rawvol)")->required();
  info_cmd->add_option("--labels", info.labels, "Label mask paired with --ct");
  info_cmd->add_flag("--json", info.json_output, "Print JSON");
  info_cmd->add_flag("--ignore-orientation", info.ignore_orientation,
                     "Accept NIfTI files with rotated qform/sform");

  RenderFlags rf;
  auto* render_cmd = app.add_subcommand("render", "Render one infection-aware DRR");
  render_cmd->add_option("--ct", rf.ct, "CT volume")->required();
  render_cmd->add_option("--labels", rf.labels, "Label mask")->required();
  render_cmd->add_option("--weights", rf.weights, "Class weights w0,w1,w2")->capture_default_str();
  render_cmd->add_option("--t1", rf.t1, "Lung contribution threshold")->capture_default_str();
  render_cmd->add_option("--t2", rf.t2, "Infection contribution threshold")->capture_default_str();
  render_cmd->add_option("--pose", rf.pose, "tx,ty,tz (mm),rx,ry,rz (deg)")->capture_default_str();
  render_cmd->add_option("--out", rf.out, "Output PNG")->required();
  render_cmd->add_option("--mask-out", rf.mask_out, "Label mask PNG (values 0/1/2)");
  render_cmd->add_option("--float-out", rf.float_out, "Raw little-endian float64 intensities");
  render_cmd->add_option("--mode", rf.mode, "raw | attenuation")->capture_default_str();
  render_cmd->add_option("--normalization", rf.normalization, "mean_weight | length_weighted")
      ->capture_default_str();
  render_cmd->add_option("--window", rf.window, "auto | lo,hi")->capture_default_str();
  render_cmd->add_option("--jobs", rf.jobs, "Worker threads (0 = all)")->envname("DRR_THREADS");
  render_cmd->add_flag("--ignore-orientation", rf.ignore_orientation);
  rf.geometry.add_to(render_cmd);

  DatasetFlags df;
  auto* dataset_cmd = app.add_subcommand("dataset", "Build the training-set grid from a config");
  dataset_cmd->add_option("--config", df.config, "Dataset config JSON")->required();
  dataset_cmd->add_option("--seed", df.seed, "Base seed (overrides the config)");
  dataset_cmd->add_option("--out-dir", df.out_dir, "Output directory (overrides the config)");
  dataset_cmd->add_option("--jobs", df.jobs, "Worker threads (0 = all)")->envname("DRR_THREADS");

  AnalyzeFlags af;
  auto* analyze_cmd = app.add_subcommand("analyze", "EAPIV statistics and CRIV histograms");
  analyze_cmd->add_option("--ct", af.ct, "CT volume")->required();
  analyze_cmd->add_option("--labels", af.labels, "Label mask")->required();
  analyze_cmd->add_option("--weights-grid", af.weights_grid, "JSON array of [w0,w1,w2]");
  analyze_cmd->add_option("--poses", af.poses, "Random poses per weight tuple")->capture_default_str();
  analyze_cmd->add_option("--bins", af.bins, "Histogram bins")->capture_default_str();
  analyze_cmd->add_option("--seed", af.seed, "Pose seed")->capture_default_str();
  analyze_cmd->add_option("--case-id", af.case_id, "Case id (default: CT file stem)");
  analyze_cmd->add_option("--mode", af.mode, "raw | attenuation")->capture_default_str();
  analyze_cmd->add_option("--out", af.out, "Stats JSON path")->required();
  analyze_cmd->add_option("--jobs", af.jobs, "Worker threads (0 = all)")->envname("DRR_THREADS");
  analyze_cmd->add_flag("--json", af.json_output, "Also print the stats JSON");
  analyze_cmd->add_flag("--ignore-orientation", af.ignore_orientation);
  af.geometry.add_to(analyze_cmd);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*info_cmd) return cmd_info(info, out);
    if (*render_cmd) return cmd_render(rf, out);
    if (*dataset_cmd) return cmd_dataset(df, out);
    if (*analyze_cmd) return cmd_analyze(af, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace drr::cli
