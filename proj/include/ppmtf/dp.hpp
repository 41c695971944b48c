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

#include <cstdint>
#include <optional>

#include "ppmtf/gibbs.hpp"

namespace ppmtf {

/// Reconstruction overshoot: the smallest kappa with every
/// reconstructed transition cell in [-kappa, rmax_trans + kappa] and
/// every visit cell in [-kappa, rmax_visit + kappa].
struct KappaResult {
  double kappa = 0.0;
  /// False when estimated from sampled cells; a sampled kappa is a
  /// lower bound, so downstream epsilons are lower bounds too.
  bool exact = true;
};

/// Full scan over both reconstructed tensors (parallel per user), or a
/// sampled scan of `sample_cells_per_user` random cells per tensor.
KappaResult compute_kappa(const FactorMatrices& theta, double rmax_trans, double rmax_visit,
                          std::optional<int> sample_cells_per_user = std::nullopt,
                          std::uint64_t seed = 1);

/// Trace-level privacy budget:
///   alpha * ( min{3*lambda_t, lambda_t + rho_t} * (rmax_t + kappa)^2
///           + min{3*lambda_v, lambda_v + rho_v} * (rmax_v + kappa)^2 ).
double epsilon_trace(double alpha, double lambda_trans, double rho_trans, double rmax_trans,
                     double lambda_visit, double rho_visit, double rmax_visit, double kappa);

/// Single-location privacy budget:
///   max(0, alpha * (4*rmax_trans + 8*rmax_visit + 12*kappa - 6)).
double epsilon_single_location(double alpha, double rmax_trans, double rmax_visit, double kappa);

struct KappaBoundResult {
  FactorMatrices theta;
  double kappa = 0.0;  // kappa of the returned theta (best seen on failure)
  int attempts = 0;
  bool ok = false;
  std::vector<SweepStats> convergence;  // of the returned attempt
};

/// Retrains with fresh seeds until compute_kappa(theta) <= kappa_max or
/// the retry budget is exhausted; on failure returns the best attempt.
KappaBoundResult train_with_kappa_bound(const TensorPair& tensors, const HyperPriors& priors,
                                        const GibbsConfig& cfg, double kappa_max,
                                        int max_retries);

/// Training memory footprint with 8-byte reals:
///   8|U|(lambda_t + rho_t + lambda_v + rho_v) + 8z(|U| + 2|X| + |L|).
std::uint64_t estimate_memory_bytes(std::int64_t users, std::int64_t locations,
                                    std::int64_t slots, const TrimConfig& trim, int z);

}  // namespace ppmtf
