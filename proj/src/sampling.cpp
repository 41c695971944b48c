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

#include "ppmtf/sampling.hpp"

#include <string>

#include "ppmtf/common.hpp"

namespace ppmtf {

Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * m.trace();
  Eigen::MatrixXd fixed = m;
  fixed.diagonal().array() += jitter;
  llt.compute(fixed);
  if (llt.info() == Eigen::Success) return llt;
  throw NumericalError(std::string(what) + ": matrix not positive definite even after jitter");
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  auto llt = cholesky_with_jitter(m, what);
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

Eigen::MatrixXd sample_wishart(const Eigen::MatrixXd& scale, double dof, Rng& rng) {
  const int z = static_cast<int>(scale.rows());
  if (dof < z) throw ContractError("Wishart degrees of freedom below dimension");
  auto llt = cholesky_with_jitter(scale, "Wishart scale");
  Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(z, z);
  for (int i = 0; i < z; ++i) {
    bartlett(i, i) = std::sqrt(rng.chi_squared(dof - i));
    for (int j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
  }
  const Eigen::MatrixXd lower = llt.matrixL() * bartlett;
  return lower * lower.transpose();
}

Eigen::VectorXd sample_mvn_precision(const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& precision, Rng& rng) {
  const int z = static_cast<int>(mean.size());
  auto llt = cholesky_with_jitter(precision, "MVN precision");
  Eigen::VectorXd u(z);
  for (int k = 0; k < z; ++k) u(k) = rng.normal();
  // precision = L L^T, so solving L^T x = u gives cov(x) = precision^{-1}
  return mean + llt.matrixU().solve(u);
}

}  // namespace ppmtf
