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

#include "drr/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "drr/error.hpp"

namespace drr {

double infected_proportion(const LabelVolume& labels) {
  const auto counts = labels.category_counts();
  const std::int64_t lung_region = counts[1] + counts[2];
  if (lung_region == 0) fail(ErrorCode::kNoLungRegion, "mask has no lung or infection voxels");
  return static_cast<double>(counts[2]) / static_cast<double>(lung_region);
}

double eapiv(double proportion, const ClassWeights& weights) {
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "infected proportion must lie in [0, 1]");
  }
  weights.validate();
  const double infected = weights.w2 * proportion;
  return infected / (weights.w1 * (1.0 - proportion) + infected);
}

CaseStats case_stats(std::string case_id, const LabelVolume& labels,
                     std::span<const ClassWeights> weight_grid) {
  CaseStats stats;
  stats.case_id = std::move(case_id);
  const auto counts = labels.category_counts();
  stats.lung_voxels = counts[1];
  stats.infected_voxels = counts[2];
  stats.proportion = infected_proportion(labels);
  for (const ClassWeights& w : weight_grid) {
    stats.eapiv_by_weights.emplace_back(w, eapiv(stats.proportion, w));
  }
  return stats;
}

std::vector<EapivSummary> eapiv_table(std::span<const CaseStats> cases,
                                      std::span<const ClassWeights> weight_grid) {
  if (cases.empty()) fail(ErrorCode::kEmptyInput, "EAPIV table needs at least one case");
  std::vector<EapivSummary> table;
  const auto n = static_cast<double>(cases.size());
  for (const ClassWeights& w : weight_grid) {
    double sum = 0.0;
    for (const CaseStats& c : cases) sum += eapiv(c.proportion, w);
    const double mean = sum / n;
    double sq = 0.0;
    for (const CaseStats& c : cases) {
      const double d = eapiv(c.proportion, w) - mean;
      sq += d * d;
    }
    table.push_back({w, mean, std::sqrt(sq / n)});
  }
  return table;
}

CrivHistogram::CrivHistogram(int bins) {
  if (bins < 1) fail(ErrorCode::kInvalidArgument, "histogram needs at least one bin");
  counts.assign(static_cast<std::size_t>(bins), 0);
  edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) edges[b] = static_cast<double>(b) / bins;
}

std::int64_t CrivHistogram::included() const {
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  return total;
}

double CrivHistogram::mean() const {
  const std::int64_t n = included();
  return n == 0 ? 0.0 : value_sum / static_cast<double>(n);
}

void CrivHistogram::add(double pi2) {
  ++pixels_seen;
  if (!(pi2 > 0.0)) return;
  auto bin = static_cast<std::int64_t>(pi2 * bins());
  bin = std::min<std::int64_t>(bin, bins() - 1);
  ++counts[static_cast<std::size_t>(bin)];
  value_sum += pi2;
}

void CrivHistogram::add_image(const DrrImage& image) {
  for (const Contributions& c : image.contributions) add(c[2]);
}

void CrivHistogram::merge(const CrivHistogram& other) {
  if (other.bins() != bins()) fail(ErrorCode::kInvalidArgument, "cannot merge histograms with different bins");
  for (int b = 0; b < bins(); ++b) counts[b] += other.counts[b];
  pixels_seen += other.pixels_seen;
  value_sum += other.value_sum;
}

std::string CrivHistogram::to_csv() const {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  char buf[96];
  for (int b = 0; b < bins(); ++b) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%lld\n", edges[b], edges[b + 1],
                  static_cast<long long>(counts[b]));
    out << buf;
  }
  return out.str();
}

CrivHistogram criv_histogram(const CtVolume& ct, const LabelVolume& labels,
                             std::span<const RigidPose> poses, const ImagingGeometry& geometry,
                             const ClassWeights& weights, int bins, IntensityMode mode,
                             unsigned threads) {
  require_paired(ct, labels);
  if (poses.empty()) fail(ErrorCode::kEmptyInput, "CRIV histogram needs at least one pose");
  CrivHistogram total(bins);
  RenderOptions options;
  options.weights = weights;
  options.mode = mode;
  options.threads = threads;
  for (const RigidPose& pose : poses) {
    CrivHistogram partial(bins);
    partial.add_image(render(ct, labels, pose, geometry, options));
    total.merge(partial);
  }
  return total;
}

}  // namespace drr
