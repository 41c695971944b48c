// Copyright 2026 The ppmtf Authors
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

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ppmtf/trace_model.hpp"

namespace ppmtf {

/// Average total variation (half L1) between per-slot location
/// frequency distributions of the two datasets. With `top_k`, only the
/// top-k locations by testing frequency contribute (ties keep the lower
/// id) and other locations' errors count as zero. Slots with no events
/// in one dataset fall back to uniform for that side.
double tp_tv(const TraceDataset& test, const TraceDataset& synth,
             std::optional<int> top_k = std::nullopt);

/// 1-D earth mover's distance between two distributions on equally
/// spaced bins: sum of |CDF difference| with unit spacing.
double emd_1d(const std::vector<double>& p, const std::vector<double>& q);

struct TmEmdResult {
  double emd_x = 0.0;
  double emd_y = 0.0;
  int rows_used = 0;
  int rows_skipped = 0;  // testing rows with no synthetic counterpart
};

/// Time-pooled average transition matrices from both datasets; each row
/// is a conditional distribution marginalized onto x bins and y bins,
/// compared by 1-D EMD, averaged over rows with testing mass. Grid
/// coordinates bin directly; POI coordinates are binned into
/// `poi_bins` uniform bins per axis over the table's coordinate range.
TmEmdResult tm_emd(const TraceDataset& test, const TraceDataset& synth, int poi_bins = 20);

/// Average over testing-visited locations of the total variation
/// between 24-bin visit-fraction histograms. Traces with fewer than
/// `min_events` events are excluded; a fraction of exactly 1 lands in
/// the last bin.
double vf_tv(const TraceDataset& test, const TraceDataset& synth, int min_events = 5);

/// The ceil(fraction * |U|) users with the largest values in the given
/// column, ties broken by the lower index.
std::vector<int> extract_cluster(const Eigen::MatrixXd& a, int column, double fraction);

/// Reference dataset with every location drawn i.i.d. uniform,
/// gap-free traces covering all instants.
TraceDataset uniform_baseline(int users, const LocationTable& locations, const TimeSlotMap& time,
                              std::uint64_t seed);

/// The training traces re-emitted unchanged as synthetic traces.
TraceDataset training_baseline(const TraceDataset& data);

struct UtilityReport {
  double tp_tv = 0.0;
  double tp_tv_top50 = 0.0;
  double tm_emd_x = 0.0;
  double tm_emd_y = 0.0;
  double vf_tv = 0.0;
};

/// All metrics of `synth` against `test` in one pass.
UtilityReport evaluate_utility(const TraceDataset& test, const TraceDataset& synth,
                               int top_k = 50, int poi_bins = 20);

}  // namespace ppmtf
