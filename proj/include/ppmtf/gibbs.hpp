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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ppmtf/sampling.hpp"
#include "ppmtf/tensor.hpp"

namespace ppmtf {

/// The model parameters: user, location, next-location and time-slot
/// factor matrices, all with z columns. A and B are shared between the
/// transition view (A, B, C) and the visit view (A, B, D).
struct FactorMatrices {
  Eigen::MatrixXd A;  // |U| x z
  Eigen::MatrixXd B;  // |X| x z
  Eigen::MatrixXd C;  // |X| x z
  Eigen::MatrixXd D;  // |L| x z

  int factors() const { return static_cast<int>(A.cols()); }
};

/// Normal-Wishart hyperprior shared by all four factor matrices.
struct HyperPriors {
  Eigen::VectorXd mu0;
  double beta0 = 2.0;
  Eigen::MatrixXd w0;
  double nu0 = 0.0;

  static HyperPriors defaults(int z);
  void validate(int z) const;
};

/// One factor matrix's row prior (mean vector and precision matrix).
struct NormalWishart {
  Eigen::VectorXd mu;
  Eigen::MatrixXd precision;
};

enum class GibbsMode { shared, independent };

struct GibbsConfig {
  double alpha = 200.0;  // observation precision
  int factors = 16;      // z
  int iterations = 100;
  int burn_in = 99;  // discarded; the returned sample is sweep `iterations`
  std::uint64_t seed = 1;
  GibbsMode mode = GibbsMode::shared;

  void validate() const;
};

struct SweepStats {
  int sweep = 0;
  double observed_l1_trans = 0.0;
  double observed_l1_visit = 0.0;
};

/// Training output. In shared mode `theta` holds the full (A,B,C,D).
/// In independent mode `theta` is the (A,B,C) system fit to the
/// transition tensor and `visit_theta` the (A,B,D) system fit to the
/// visit tensor; the unused factor matrix in each is empty.
struct GibbsResult {
  FactorMatrices theta;
  std::optional<FactorMatrices> visit_theta;
  std::vector<SweepStats> convergence;
};

/// Observed cells of one tensor (positives plus observed zeros), grouped
/// by each mode so row conditionals can walk only their own cells.
struct ObservedCells {
  int users = 0;
  int rows = 0;
  int cols = 0;

  struct Ref {
    std::int32_t a = 0;  // first non-group index
    std::int32_t b = 0;  // second non-group index
    double value = 0.0;
  };
  std::vector<Ref> by_user;  // (i, j) keyed by n
  std::vector<Ref> by_row;   // (n, j) keyed by i
  std::vector<Ref> by_col;   // (n, i) keyed by j
  std::vector<std::int64_t> user_offsets;
  std::vector<std::int64_t> row_offsets;
  std::vector<std::int64_t> col_offsets;

  static ObservedCells from(const SparseCountTensor& tensor);

  std::span<const Ref> user_cells(int n) const {
    return {by_user.data() + user_offsets[n],
            static_cast<std::size_t>(user_offsets[n + 1] - user_offsets[n])};
  }
  std::span<const Ref> row_cells(int i) const {
    return {by_row.data() + row_offsets[i],
            static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
  }
  std::span<const Ref> col_cells(int j) const {
    return {by_col.data() + col_offsets[j],
            static_cast<std::size_t>(col_offsets[j + 1] - col_offsets[j])};
  }
};

enum class FactorId { a = 0, b = 1, c = 2, d = 3 };

/// Every entry i.i.d. uniform on [0, 1]; deterministic given the seed.
FactorMatrices init_factors(int users, int locations, int slots, int z, std::uint64_t seed);

/// Normal-Wishart posterior parameters given the rows of one factor
/// matrix; with zero rows this is exactly the prior.
struct NormalWishartPosterior {
  Eigen::VectorXd mu0;
  double beta0 = 0.0;
  Eigen::MatrixXd w0;
  double nu0 = 0.0;
};
NormalWishartPosterior normal_wishart_posterior(const Eigen::MatrixXd& factor,
                                                const HyperPriors& priors);

/// Draws (mu_Z, Lambda_Z) from the Normal-Wishart posterior given the
/// rows of one factor matrix: Lambda ~ Wishart(w0*, nu0*), then
/// mu ~ N(mu0*, (beta0* Lambda)^{-1}).
NormalWishart sample_hyperparams(const Eigen::MatrixXd& factor, const HyperPriors& priors,
                                 Rng& rng);

/// Conditional precision and precision-times-mean for one row of the
/// target factor, accumulated over that row's observed cells. Either
/// tensor pointer may be null (independent mode, or factors C/D which
/// see only one tensor).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> row_posterior(FactorId target, int row,
                                                          const ObservedCells* trans,
                                                          const ObservedCells* visit,
                                                          const FactorMatrices& theta,
                                                          const NormalWishart& hp, double alpha);

/// Redraws every row of the target factor matrix from its conditional.
/// Rows are independent given the rest and are sampled in parallel; each
/// row draws from substream (seed, gibbs_row, sweep, target, row).
void sample_factor_rows(FactorId target, const ObservedCells* trans, const ObservedCells* visit,
                        FactorMatrices& theta, const NormalWishart& hp, double alpha,
                        std::uint64_t seed, int sweep);

/// Full Gibbs training run: per sweep, hyperparameters for A, B, C, D
/// then factor rows for A, B, C, D, in that order. Emits per-sweep
/// observed-cell L1 for both tensors.
GibbsResult gibbs_train(const TensorPair& tensors, const HyperPriors& priors,
                        const GibbsConfig& cfg);

/// Exact trilinear reconstruction of one user's slices.
Eigen::MatrixXd reconstruct_transition_slice(const FactorMatrices& theta, int n);
Eigen::MatrixXd reconstruct_visit_slice(const FactorMatrices& theta, int n);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> reconstruct_user(const FactorMatrices& theta, int n);

/// Sum over observed cells of |r - r_hat| under the (A, M1, M2) views
/// stored in `theta` for this tensor.
double observed_l1(const ObservedCells& cells, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M1,
                   const Eigen::MatrixXd& M2);

struct ReconstructionReport {
  double observed_l1_trans = 0.0;
  double observed_l1_visit = 0.0;
  double unobserved_l1_trans = 0.0;  // scaled estimate
  double unobserved_l1_visit = 0.0;  // scaled estimate
  std::int64_t unobserved_cells_trans = 0;
  std::int64_t unobserved_cells_visit = 0;
};

/// Observed L1 summed exactly; unobserved L1 estimated from
/// `samples_per_user` uniform unobserved cells per user and scaled by
/// (total unobserved) / (samples_per_user * |U|).
ReconstructionReport reconstruction_report(const FactorMatrices& trans_theta,
                                           const FactorMatrices& visit_theta,
                                           const TensorPair& tensors, int samples_per_user,
                                           std::uint64_t seed);

}  // namespace ppmtf
