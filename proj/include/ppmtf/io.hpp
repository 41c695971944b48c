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

#include <filesystem>
#include <string>

#include "ppmtf/gibbs.hpp"
#include "ppmtf/trace_model.hpp"

namespace ppmtf {

/// Row-per-entity CSV with 17 significant digits (value-exact round
/// trip).
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Persists a training run: factor CSVs (A/B/C/D, or the _I/_II pairs in
/// independent mode), a model.json sidecar with config and priors, and
/// the convergence log.
void write_factors(const std::filesystem::path& dir, const GibbsResult& result,
                   const GibbsConfig& cfg, const HyperPriors& priors);

struct LoadedFactors {
  GibbsResult result;
  GibbsConfig cfg;
  HyperPriors priors;
};
LoadedFactors read_factors(const std::filesystem::path& dir);

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<SweepStats>& stats);

LocationTable read_locations_file(const std::filesystem::path& path,
                                  LocationKind kind = LocationKind::grid);
TimeSlotMap read_time_slots_file(const std::filesystem::path& path,
                                 std::optional<int> fallback_instants = {});
TraceDataset read_traces_file(const std::filesystem::path& events_path,
                              const LocationTable& locations, const TimeSlotMap& time);
void write_traces_file(const std::filesystem::path& path, const TraceDataset& data);
void write_locations_file(const std::filesystem::path& path, const LocationTable& locations);
void write_time_slots_file(const std::filesystem::path& path, const TimeSlotMap& time);

SparseCountTensor read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path, const SparseCountTensor& tensor);

}  // namespace ppmtf
