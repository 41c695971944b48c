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
#include <optional>
#include <string>

#include "ppmtf/attacks.hpp"
#include "ppmtf/demo.hpp"
#include "ppmtf/dp.hpp"
#include "ppmtf/gibbs.hpp"
#include "ppmtf/metrics.hpp"
#include "ppmtf/pd.hpp"
#include "ppmtf/sgd.hpp"
#include "ppmtf/tensor.hpp"

namespace ppmtf {

struct SynthesisConfig {
  double phi = 1e-8;
  int replicas = 1;  // synthetic traces per input user
  int length = 0;    // instants per trace; 0 = all instants
  std::uint64_t seed = 1;

  void validate() const;
};

/// In-memory synthetic traces plus their input users. PD gating, when
/// requested, splits traces into released and quarantined sets.
struct SynthesisResult {
  TraceDataset released;
  TraceDataset quarantined;
  std::vector<int> released_input_user;
  std::vector<int> quarantined_input_user;
  std::vector<PDResult> pd_results;  // per generated trace, gating only
};

/// Generates `replicas` traces per training user from the trained
/// factors; with `pd` set, runs the bucket test on every trace and
/// quarantines failures instead of releasing them.
SynthesisResult synthesize_dataset(const FactorMatrices& theta, const FactorMatrices& visit_theta,
                                   const TraceDataset& train, const SynthesisConfig& cfg,
                                   const PDConfig* pd);

/// SGD-baseline variant of synthesize_dataset.
SynthesisResult sgd_synthesize_dataset(const SgdModel& model, const TraceDataset& train,
                                       const SynthesisConfig& cfg, const PDConfig* pd);

/// PD results for already-generated traces under the trained factors.
std::vector<PDResult> pd_test_dataset(const FactorMatrices& theta,
                                      const FactorMatrices& visit_theta,
                                      const TraceDataset& train, const TraceDataset& synthetic,
                                      const std::vector<int>& input_users, double phi,
                                      const PDConfig& cfg);

/// Maps synthetic user fields (`name#replica`) back to training user
/// indices; throws ParseError for unknown base names.
std::vector<int> input_users_from_names(const TraceDataset& synthetic,
                                        const TraceDataset& train);

struct AttackSummary {
  double reid_rate = 0.0;
  int reid_traces = 0;     // traces scored (with at least one transition)
  int reid_skipped = 0;    // traces without transitions
  MembershipResult membership;
};

/// Maximum-knowledge attacks: re-identification of every synthetic
/// trace over the training users, and membership inference over
/// training (member) and testing (non-member) users.
AttackSummary run_attacks(const TraceDataset& train, const TraceDataset& test,
                          const TraceDataset& synthetic, const std::vector<int>& input_users);

struct PipelineConfig {
  DemoSpec demo;
  TrimConfig trim;
  GibbsConfig gibbs;
  SynthesisConfig synthesis;
  PDConfig pd;
  bool pd_gate = true;
};

/// Demo-data end-to-end run writing every artifact beneath `out_dir`
/// (the determinism contract: identical config and seed give
/// byte-identical files). Returns the utility report of the released
/// traces.
UtilityReport run_demo_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace ppmtf
