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
#include <utility>
#include <vector>

#include "ppmtf/trace_model.hpp"

namespace ppmtf {

/// Maximum-knowledge attacker state: one time-homogeneous transition
/// matrix per known user, MLE-trained on that user's original trace
/// with zero cells floored at 1e-8 and rows renormalized. `w_sum`
/// supports leave-one-out population matrices for membership inference.
struct AttackModel {
  std::vector<Eigen::MatrixXd> w;  // per user
  Eigen::MatrixXd w_sum;           // sum over all users

  int users() const { return static_cast<int>(w.size()); }
  /// Average of every matrix except the target's.
  Eigen::MatrixXd population_excluding(int user) const;
};

AttackModel build_attack_model(const std::vector<Trace>& traces, int locations,
                               double floor = 1e-8);

/// Sum of per-transition log likelihoods of y under w. Throws
/// ContractError when y has no adjacent-instant transition.
double transition_log_likelihood(const Trace& y, const Eigen::MatrixXd& w);

/// Bayesian re-identification with a uniform user prior: the candidate
/// in [0, candidate_count) with the highest likelihood, ties broken by
/// the lowest index.
int reidentify(const Trace& y, const AttackModel& model, int candidate_count);

/// correct / total over (predicted, truth) pairs.
double reid_rate(const std::vector<std::pair<int, int>>& assignments);

struct MembershipConfig {
  std::vector<int> members;     // candidate users with traces in training
  std::vector<int> nonmembers;  // candidate users outside training
  /// Thresholds to sweep; empty = 201 evenly spaced values spanning the
  /// observed score range.
  std::vector<double> thresholds;
};

struct MembershipResult {
  double best_advantage = 0.0;
  double best_threshold = 0.0;
  std::vector<std::pair<double, double>> curve;  // (psi, advantage)
  std::vector<double> scores;                    // per candidate, max log-ratio
  int skipped_traces = 0;                        // traces with no transition
};

/// Likelihood-ratio membership inference: candidate v is declared a
/// member at threshold psi when the max over synthetic traces of
/// log(p(y|W_v) / p(y|W_0^{(v)})) reaches psi. Advantage is the true
/// positive rate minus the false positive rate, maximized over psi.
/// Synthetic traces without transitions are skipped.
MembershipResult membership_advantage(const std::vector<Trace>& synthetic,
                                      const AttackModel& model, const MembershipConfig& cfg);

}  // namespace ppmtf
