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

#include "ppmtf/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ppmtf {
namespace {

double cell_overshoot(double reconstructed, double rmax) {
  return std::max({-reconstructed, reconstructed - rmax, 0.0});
}

double slice_overshoot(const Eigen::MatrixXd& slice, double rmax) {
  return std::max({0.0, -slice.minCoeff(), slice.maxCoeff() - rmax});
}

}  // namespace

KappaResult compute_kappa(const FactorMatrices& theta, double rmax_trans, double rmax_visit,
                          std::optional<int> sample_cells_per_user, std::uint64_t seed) {
  if (theta.C.rows() == 0 || theta.D.rows() == 0)
    throw ContractError("kappa needs the full coupled factor set");
  const int users = static_cast<int>(theta.A.rows());
  std::vector<double> per_user(users, 0.0);

  if (!sample_cells_per_user) {
    parallel_for(users, [&](std::int64_t n) {
      const double t = slice_overshoot(reconstruct_transition_slice(theta, static_cast<int>(n)),
                                       rmax_trans);
      const double v =
          slice_overshoot(reconstruct_visit_slice(theta, static_cast<int>(n)), rmax_visit);
      per_user[n] = std::max(t, v);
    });
  } else {
    const int samples = *sample_cells_per_user;
    const std::int64_t trans_cells =
        static_cast<std::int64_t>(theta.B.rows()) * theta.C.rows();
    const std::int64_t visit_cells =
        static_cast<std::int64_t>(theta.B.rows()) * theta.D.rows();
    parallel_for(users, [&](std::int64_t n) {
      Rng rng = substream(seed, RngTag::report, 100, n);
      double worst = 0.0;
      for (int s = 0; s < samples; ++s) {
        const std::int64_t key = rng.below(trans_cells);
        const int i = static_cast<int>(key / theta.C.rows());
        const int j = static_cast<int>(key % theta.C.rows());
        const double r = (theta.A.row(n).array() * theta.B.row(i).array() *
                          theta.C.row(j).array())
                             .sum();
        worst = std::max(worst, cell_overshoot(r, rmax_trans));
      }
      for (int s = 0; s < samples; ++s) {
        const std::int64_t key = rng.below(visit_cells);
        const int i = static_cast<int>(key / theta.D.rows());
        const int j = static_cast<int>(key % theta.D.rows());
        const double r = (theta.A.row(n).array() * theta.B.row(i).array() *
                          theta.D.row(j).array())
                             .sum();
        worst = std::max(worst, cell_overshoot(r, rmax_visit));
      }
      per_user[n] = worst;
    });
  }

  KappaResult result;
  result.exact = !sample_cells_per_user.has_value();
  for (double v : per_user) result.kappa = std::max(result.kappa, v);
  return result;
}

double epsilon_trace(double alpha, double lambda_trans, double rho_trans, double rmax_trans,
                     double lambda_visit, double rho_visit, double rmax_visit, double kappa) {
  const double trans_cells = std::min(3.0 * lambda_trans, lambda_trans + rho_trans);
  const double visit_cells = std::min(3.0 * lambda_visit, lambda_visit + rho_visit);
  const double trans_base = rmax_trans + kappa;
  const double visit_base = rmax_visit + kappa;
  return alpha * (trans_cells * trans_base * trans_base + visit_cells * visit_base * visit_base);
}

double epsilon_single_location(double alpha, double rmax_trans, double rmax_visit, double kappa) {
  return std::max(0.0, alpha * (4.0 * rmax_trans + 8.0 * rmax_visit + 12.0 * kappa - 6.0));
}

KappaBoundResult train_with_kappa_bound(const TensorPair& tensors, const HyperPriors& priors,
                                        const GibbsConfig& cfg, double kappa_max,
                                        int max_retries) {
  if (kappa_max < 0) throw ConfigError("kappa_max must be non-negative");
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (tensors.trans.rmax <= 0 || tensors.visit.rmax <= 0)
    throw ConfigError("kappa-bounded training needs truncated tensors");

  KappaBoundResult best;
  best.kappa = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    GibbsConfig attempt_cfg = cfg;
    attempt_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(RngTag::retrain), attempt);
    GibbsResult trained = gibbs_train(tensors, priors, attempt_cfg);
    const double kappa =
        compute_kappa(trained.theta, tensors.trans.rmax, tensors.visit.rmax).kappa;
    if (kappa < best.kappa) {
      best.theta = std::move(trained.theta);
      best.kappa = kappa;
      best.convergence = std::move(trained.convergence);
    }
    best.attempts = attempt + 1;
    if (best.kappa <= kappa_max) {
      best.ok = true;
      return best;
    }
  }
  best.ok = false;
  return best;
}

std::uint64_t estimate_memory_bytes(std::int64_t users, std::int64_t locations,
                                    std::int64_t slots, const TrimConfig& trim, int z) {
  if (users < 0 || locations < 0 || slots < 0 || z < 0)
    throw ContractError("negative size in memory estimate");
  const std::uint64_t cells = static_cast<std::uint64_t>(trim.lambda_trans) + trim.rho_trans +
                              trim.lambda_visit + trim.rho_visit;
  return 8ULL * static_cast<std::uint64_t>(users) * cells +
         8ULL * static_cast<std::uint64_t>(z) *
             (static_cast<std::uint64_t>(users) + 2ULL * locations + slots);
}

}  // namespace ppmtf
