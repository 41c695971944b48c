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

#include "ppmtf/gibbs.hpp"
#include "ppmtf/generator.hpp"
#include "ppmtf/tensor.hpp"

// Plain serial re-implementations of the hot kernels, written with
// element loops instead of vectorized expressions. Tests pin the
// parallel kernels against these, and the benchmark tool compares their
// speed.
namespace ppmtf::serial {

/// Triple-loop trilinear reconstruction.
Eigen::MatrixXd reconstruct_transition_slice(const FactorMatrices& theta, int n);
Eigen::MatrixXd reconstruct_visit_slice(const FactorMatrices& theta, int n);

/// Scalar-loop accumulation of one row's conditional (precision,
/// precision * mean).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> row_posterior(FactorId target, int row,
                                                          const ObservedCells* trans,
                                                          const ObservedCells* visit,
                                                          const FactorMatrices& theta,
                                                          const NormalWishart& hp, double alpha);

/// Scalar-loop Metropolis-Hastings adjustment.
Eigen::MatrixXd mh_adjust(const Eigen::MatrixXd& q_star, const Eigen::VectorXd& pi);

/// Single-threaded tensor counting.
SparseCountTensor build_transition_tensor(const TraceDataset& data);
SparseCountTensor build_visit_tensor(const TraceDataset& data);

/// Probability as a direct product of factors, logged at the end.
/// Underflows for long traces; meant for short-trace cross-checks.
double trace_probability_direct(const MarkovGenerator& gen, const Trace& trace,
                                const TimeSlotMap& time);

}  // namespace ppmtf::serial
