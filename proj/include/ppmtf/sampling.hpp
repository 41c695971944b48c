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

#include "ppmtf/common.hpp"
#include "ppmtf/rng.hpp"

namespace ppmtf {

/// Cholesky factorization that retries once with a small diagonal jitter
/// (1e-10 * trace * I) before giving up with NumericalError. Silent
/// regularization beyond that single jitter would bias posteriors.
Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& m, const char* what);

/// Inverse of an SPD matrix through its Cholesky factor.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what);

/// Draws from Wishart(scale, dof) by the Bartlett decomposition.
/// Consumes z(z-1)/2 normals and z chi-square variates.
Eigen::MatrixXd sample_wishart(const Eigen::MatrixXd& scale, double dof, Rng& rng);

/// Draws x ~ N(mean, precision^{-1}) by solving against the upper
/// Cholesky factor of the precision (no explicit inversion).
Eigen::VectorXd sample_mvn_precision(const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& precision, Rng& rng);

}  // namespace ppmtf
