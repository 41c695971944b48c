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
#include <vector>

#include "ppmtf/gibbs.hpp"
#include "ppmtf/trace_model.hpp"

namespace ppmtf {

/// One user's synthetic-trace sampler: the proposal matrix derived from
/// the reconstructed transition counts, and per-slot adjusted transition
/// matrices whose stationary distribution equals the per-slot visit
/// vector. All rows and vectors are strictly positive (regular chains).
struct MarkovGenerator {
  int user = 0;
  double floor = 1e-8;  // phi
  Eigen::MatrixXd q_star;            // |X| x |X| row-stochastic proposal
  std::vector<Eigen::MatrixXd> q;    // per slot, |X| x |X|
  std::vector<Eigen::VectorXd> pi;   // per slot, |X|

  int locations() const { return static_cast<int>(q_star.rows()); }
  int slots() const { return static_cast<int>(q.size()); }
};

/// Raises entries below phi to phi, then normalizes each row to sum 1.
/// Negative inputs fall below the floor, so outputs are strictly
/// positive and normalizable for any finite input.
Eigen::MatrixXd normalize_rows_with_floor(Eigen::MatrixXd m, double phi);
Eigen::VectorXd normalize_with_floor(Eigen::VectorXd v, double phi);

/// Metropolis-Hastings adjustment: returns Q with
///   Q(b|a) = Q*(b|a) * min(1, pi(b) Q*(a|b) / (pi(a) Q*(b|a)))  (b != a)
/// and the diagonal as the row complement, so pi is a stationary
/// distribution of Q. Inputs must be strictly positive.
Eigen::MatrixXd mh_adjust(const Eigen::MatrixXd& q_star, const Eigen::VectorXd& pi);

/// Builds the generator of user n: the transition slice is floored and
/// row-normalized into the proposal, each visit-slice column is floored
/// and normalized into a per-slot target, and every slot gets its
/// adjusted matrix. `visit_theta` supplies the visit view (pass `theta`
/// again for the shared model).
MarkovGenerator build_generator(const FactorMatrices& theta, const FactorMatrices& visit_theta,
                                int user, const TimeSlotMap& time, double phi);
MarkovGenerator build_generator(const FactorMatrices& theta, int user, const TimeSlotMap& time,
                                double phi);

/// Draws a gap-free trace over instants [0, length): the first location
/// from the first instant's slot target, each later location from the
/// adjusted matrix of its instant's slot, conditioned on the previous
/// location. Categorical draws invert the running CDF of the row.
Trace synthesize_trace(const MarkovGenerator& gen, const TimeSlotMap& time, int length, Rng& rng);

/// Log of the exact generation probability of a gap-free trace under
/// this generator. Throws ContractError when the trace has a gap.
double trace_log_probability(const MarkovGenerator& gen, const Trace& trace,
                             const TimeSlotMap& time);

}  // namespace ppmtf
