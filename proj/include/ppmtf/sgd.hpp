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

#include "ppmtf/rng.hpp"
#include "ppmtf/trace_model.hpp"

namespace ppmtf {

/// Population-level baseline synthesizer: one maximum-likelihood
/// transition matrix per time slot plus a first-instant visit vector,
/// all common to every user, with an optional xi-event prefix copied
/// from the input trace.
struct SgdModel {
  std::vector<Eigen::MatrixXd> q;  // per slot, |X| x |X| row-stochastic
  Eigen::VectorXd pi_first;        // |X|, first-instant visit probabilities
  int xi = 0;                      // events copied from the input trace

  int locations() const { return static_cast<int>(pi_first.size()); }
};

/// Slot-pooled MLE over all users' adjacent-instant transitions (a
/// transition at (t, t+1) counts toward the slot of t+1). Zero rows
/// become uniform; remaining zero cells are floored at 1e-8 and rows
/// renormalized so likelihoods stay positive.
SgdModel train_sgd(const TraceDataset& data, int xi = 0, double floor = 1e-8);

/// Synthesizes a gap-free trace over instants [0, length). The first xi
/// instants copy the input trace where it has events; missing copied
/// instants are generated instead. With xi = 0 the output never reads
/// the input trace.
Trace sgd_synthesize(const SgdModel& model, const Trace& input, const TimeSlotMap& time,
                     int length, Rng& rng);

/// Log generation probability of y for input user m: copied instants
/// contribute 0 when they match user m's training trace and -inf when
/// they cannot; generated instants contribute the model factors.
double sgd_log_probability(const SgdModel& model, const Trace& y, const Trace& input_of_m,
                           const TimeSlotMap& time);

}  // namespace ppmtf
