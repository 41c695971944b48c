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

#include "ppmtf/gibbs.hpp"

#include <algorithm>
#include <unordered_set>

namespace ppmtf {

HyperPriors HyperPriors::defaults(int z) {
  HyperPriors p;
  p.mu0 = Eigen::VectorXd::Zero(z);
  p.beta0 = 2.0;
  p.w0 = Eigen::MatrixXd::Identity(z, z);
  p.nu0 = z;
  return p;
}

void HyperPriors::validate(int z) const {
  if (mu0.size() != z || w0.rows() != z || w0.cols() != z)
    throw ConfigError("hyperprior dimensions disagree with z");
  if (beta0 <= 0) throw ConfigError("beta0 must be positive");
  if (nu0 < z) throw ConfigError("nu0 must be at least z");
  Eigen::LLT<Eigen::MatrixXd> llt(w0);
  if (llt.info() != Eigen::Success) throw ConfigError("W0 must be positive definite");
}

void GibbsConfig::validate() const {
  if (alpha <= 0) throw ConfigError("alpha must be positive");
  if (factors <= 0) throw ConfigError("factor count must be positive");
  if (iterations <= burn_in || burn_in < 0)
    throw ConfigError("need iterations > burn_in >= 0");
}

ObservedCells ObservedCells::from(const SparseCountTensor& tensor) {
  ObservedCells cells;
  cells.users = tensor.users;
  cells.rows = tensor.rows;
  cells.cols = tensor.cols;

  std::int64_t total = 0;
  for (int n = 0; n < tensor.users; ++n)
    total += static_cast<std::int64_t>(tensor.entries[n].size()) +
             static_cast<std::int64_t>(tensor.observed_zeros[n].size());

  // user-major order: positives then observed zeros, each pre-sorted
  struct Full {
    std::int32_t n, i, j;
    double value;
  };
  std::vector<Full> flat;
  flat.reserve(total);
  for (int n = 0; n < tensor.users; ++n) {
    for (const auto& c : tensor.entries[n])
      flat.push_back({n, c.i, c.j, static_cast<double>(c.count)});
    for (const auto& [i, j] : tensor.observed_zeros[n]) flat.push_back({n, i, j, 0.0});
  }

  auto group = [&](auto key, auto ref_a, auto ref_b, int groups, std::vector<Ref>& out,
                   std::vector<std::int64_t>& offsets) {
    offsets.assign(groups + 1, 0);
    for (const Full& f : flat) ++offsets[key(f) + 1];
    for (int g = 0; g < groups; ++g) offsets[g + 1] += offsets[g];
    out.resize(flat.size());
    std::vector<std::int64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const Full& f : flat) out[cursor[key(f)]++] = Ref{ref_a(f), ref_b(f), f.value};
  };

  group([](const Full& f) { return f.n; }, [](const Full& f) { return f.i; },
        [](const Full& f) { return f.j; }, cells.users, cells.by_user, cells.user_offsets);
  group([](const Full& f) { return f.i; }, [](const Full& f) { return f.n; },
        [](const Full& f) { return f.j; }, cells.rows, cells.by_row, cells.row_offsets);
  group([](const Full& f) { return f.j; }, [](const Full& f) { return f.n; },
        [](const Full& f) { return f.i; }, cells.cols, cells.by_col, cells.col_offsets);
  return cells;
}

FactorMatrices init_factors(int users, int locations, int slots, int z, std::uint64_t seed) {
  FactorMatrices theta;
  auto fill = [&](Eigen::MatrixXd& m, int rows, FactorId id) {
    m.resize(rows, z);
    Rng rng = substream(seed, RngTag::factor_init, static_cast<std::uint64_t>(id));
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < z; ++k) m(r, k) = rng.uniform01();
  };
  fill(theta.A, users, FactorId::a);
  fill(theta.B, locations, FactorId::b);
  fill(theta.C, locations, FactorId::c);
  fill(theta.D, slots, FactorId::d);
  return theta;
}

NormalWishartPosterior normal_wishart_posterior(const Eigen::MatrixXd& factor,
                                                const HyperPriors& priors) {
  const int z = static_cast<int>(priors.mu0.size());
  const double n = static_cast<double>(factor.rows());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(z);
  Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(z, z);
  if (factor.rows() > 0) {
    mean = factor.colwise().mean();
    second_moment = (factor.transpose() * factor) / n;
  }

  NormalWishartPosterior post;
  post.beta0 = priors.beta0 + n;
  post.nu0 = priors.nu0 + n;
  post.mu0 = (priors.beta0 * priors.mu0 + n * mean) / post.beta0;

  const Eigen::VectorXd diff = priors.mu0 - mean;
  const Eigen::MatrixXd w_post_inv = spd_inverse(priors.w0, "W0") + n * second_moment +
                                     (priors.beta0 * n / post.beta0) * (diff * diff.transpose());
  post.w0 = spd_inverse(w_post_inv, "posterior scale");
  return post;
}

NormalWishart sample_hyperparams(const Eigen::MatrixXd& factor, const HyperPriors& priors,
                                 Rng& rng) {
  const NormalWishartPosterior post = normal_wishart_posterior(factor, priors);
  NormalWishart hp;
  hp.precision = sample_wishart(post.w0, post.nu0, rng);
  hp.mu = sample_mvn_precision(post.mu0, post.beta0 * hp.precision, rng);
  return hp;
}

namespace {

// The two matrices whose rows form the Hadamard-product covariate for a
// cell of one tensor, given the factor being resampled.
struct CellViews {
  const Eigen::MatrixXd* first = nullptr;
  const Eigen::MatrixXd* second = nullptr;
  const ObservedCells* cells = nullptr;
};

std::span<const ObservedCells::Ref> cells_for(FactorId target, const ObservedCells& cells,
                                              int row) {
  switch (target) {
    case FactorId::a:
      return cells.user_cells(row);
    case FactorId::b:
      return cells.row_cells(row);
    case FactorId::c:
    case FactorId::d:
      return cells.col_cells(row);
  }
  return {};
}

// Per-tensor covariate matrices for each resampling target.
std::pair<CellViews, CellViews> views_for(FactorId target, const ObservedCells* trans,
                                          const ObservedCells* visit,
                                          const FactorMatrices& theta) {
  CellViews t, v;
  switch (target) {
    case FactorId::a:
      t = {&theta.B, &theta.C, trans};
      v = {&theta.B, &theta.D, visit};
      break;
    case FactorId::b:
      t = {&theta.A, &theta.C, trans};
      v = {&theta.A, &theta.D, visit};
      break;
    case FactorId::c:
      t = {&theta.A, &theta.B, trans};
      break;
    case FactorId::d:
      v = {&theta.A, &theta.B, visit};
      break;
  }
  return {t, v};
}

Eigen::MatrixXd& target_matrix(FactorId target, FactorMatrices& theta) {
  switch (target) {
    case FactorId::a:
      return theta.A;
    case FactorId::b:
      return theta.B;
    case FactorId::c:
      return theta.C;
    case FactorId::d:
      return theta.D;
  }
  return theta.A;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd> row_posterior(FactorId target, int row,
                                                          const ObservedCells* trans,
                                                          const ObservedCells* visit,
                                                          const FactorMatrices& theta,
                                                          const NormalWishart& hp, double alpha) {
  const int z = static_cast<int>(hp.mu.size());
  Eigen::MatrixXd lambda = hp.precision;
  Eigen::VectorXd rhs = hp.precision * hp.mu;
  Eigen::VectorXd v(z);

  auto accumulate = [&](const CellViews& view) {
    if (!view.cells) return;
    for (const auto& ref : cells_for(target, *view.cells, row)) {
      v = (view.first->row(ref.a).array() * view.second->row(ref.b).array()).transpose();
      lambda.selfadjointView<Eigen::Lower>().rankUpdate(v, alpha);
      rhs.noalias() += (alpha * ref.value) * v;
    }
  };
  const auto [tview, vview] = views_for(target, trans, visit, theta);
  accumulate(tview);
  accumulate(vview);

  lambda = lambda.selfadjointView<Eigen::Lower>();
  return {std::move(lambda), std::move(rhs)};
}

void sample_factor_rows(FactorId target, const ObservedCells* trans, const ObservedCells* visit,
                        FactorMatrices& theta, const NormalWishart& hp, double alpha,
                        std::uint64_t seed, int sweep) {
  Eigen::MatrixXd& m = target_matrix(target, theta);
  const int z = static_cast<int>(hp.mu.size());
  parallel_for(m.rows(), [&](std::int64_t row) {
    auto [lambda, rhs] = row_posterior(target, static_cast<int>(row), trans, visit, theta, hp,
                                       alpha);
    auto llt = cholesky_with_jitter(lambda, "row conditional precision");
    const Eigen::VectorXd mu = llt.solve(rhs);
    Rng rng = substream(seed, RngTag::gibbs_row, sweep, static_cast<std::uint64_t>(target), row);
    Eigen::VectorXd u(z);
    for (int k = 0; k < z; ++k) u(k) = rng.normal();
    m.row(row) = (mu + llt.matrixU().solve(u)).transpose();
  });
}

double observed_l1(const ObservedCells& cells, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M1,
                   const Eigen::MatrixXd& M2) {
  std::vector<double> partial(cells.users, 0.0);
  parallel_for(cells.users, [&](std::int64_t n) {
    double sum = 0.0;
    for (const auto& ref : cells.user_cells(static_cast<int>(n))) {
      const double predicted =
          (A.row(n).array() * M1.row(ref.a).array() * M2.row(ref.b).array()).sum();
      sum += std::abs(ref.value - predicted);
    }
    partial[n] = sum;
  });
  double total = 0.0;
  for (double p : partial) total += p;  // fixed order keeps runs bit-identical
  return total;
}

namespace {

// One coupled system: resamples (A, B, C) against the transition cells
// and/or (A, B, D) against the visit cells, in the fixed sweep order.
struct SystemResult {
  FactorMatrices theta;
  std::vector<std::pair<double, double>> l1_per_sweep;  // (trans, visit)
};

SystemResult train_system(const ObservedCells* trans, const ObservedCells* visit, int users,
                          int locations, int slots, const HyperPriors& priors,
                          const GibbsConfig& cfg, std::uint64_t system_seed) {
  SystemResult out;
  out.theta = init_factors(users, locations, slots, cfg.factors, system_seed);
  FactorMatrices& theta = out.theta;

  // sweep 0: loss of the random initialization
  out.l1_per_sweep.emplace_back(trans ? observed_l1(*trans, theta.A, theta.B, theta.C) : 0.0,
                                visit ? observed_l1(*visit, theta.A, theta.B, theta.D) : 0.0);

  for (int sweep = 1; sweep <= cfg.iterations; ++sweep) {
    NormalWishart hp_a, hp_b, hp_c, hp_d;
    {
      Rng rng = substream(system_seed, RngTag::gibbs_hyper, sweep, 0);
      hp_a = sample_hyperparams(theta.A, priors, rng);
    }
    {
      Rng rng = substream(system_seed, RngTag::gibbs_hyper, sweep, 1);
      hp_b = sample_hyperparams(theta.B, priors, rng);
    }
    if (trans) {
      Rng rng = substream(system_seed, RngTag::gibbs_hyper, sweep, 2);
      hp_c = sample_hyperparams(theta.C, priors, rng);
    }
    if (visit) {
      Rng rng = substream(system_seed, RngTag::gibbs_hyper, sweep, 3);
      hp_d = sample_hyperparams(theta.D, priors, rng);
    }

    sample_factor_rows(FactorId::a, trans, visit, theta, hp_a, cfg.alpha, system_seed, sweep);
    sample_factor_rows(FactorId::b, trans, visit, theta, hp_b, cfg.alpha, system_seed, sweep);
    if (trans)
      sample_factor_rows(FactorId::c, trans, nullptr, theta, hp_c, cfg.alpha, system_seed, sweep);
    if (visit)
      sample_factor_rows(FactorId::d, nullptr, visit, theta, hp_d, cfg.alpha, system_seed, sweep);

    const double l1_t = trans ? observed_l1(*trans, theta.A, theta.B, theta.C) : 0.0;
    const double l1_v = visit ? observed_l1(*visit, theta.A, theta.B, theta.D) : 0.0;
    out.l1_per_sweep.emplace_back(l1_t, l1_v);
  }
  return out;
}

}  // namespace

GibbsResult gibbs_train(const TensorPair& tensors, const HyperPriors& priors,
                        const GibbsConfig& cfg) {
  cfg.validate();
  priors.validate(cfg.factors);
  if (tensors.trans.users != tensors.visit.users)
    throw ConfigError("tensor pair disagrees on user count");
  const int users = tensors.trans.users;
  const int locations = tensors.trans.rows;
  const int slots = tensors.visit.cols;

  const ObservedCells trans_cells = ObservedCells::from(tensors.trans);
  const ObservedCells visit_cells = ObservedCells::from(tensors.visit);

  GibbsResult result;
  if (cfg.mode == GibbsMode::shared) {
    SystemResult sys = train_system(&trans_cells, &visit_cells, users, locations, slots, priors,
                                    cfg, mix_seed(cfg.seed, 0));
    result.theta = std::move(sys.theta);
    for (int s = 0; s <= cfg.iterations; ++s)
      result.convergence.push_back({s, sys.l1_per_sweep[s].first, sys.l1_per_sweep[s].second});
  } else {
    SystemResult trans_sys = train_system(&trans_cells, nullptr, users, locations, slots, priors,
                                          cfg, mix_seed(cfg.seed, 1));
    SystemResult visit_sys = train_system(nullptr, &visit_cells, users, locations, slots, priors,
                                          cfg, mix_seed(cfg.seed, 2));
    trans_sys.theta.D.resize(0, cfg.factors);
    visit_sys.theta.C.resize(0, cfg.factors);
    result.theta = std::move(trans_sys.theta);
    result.visit_theta = std::move(visit_sys.theta);
    for (int s = 0; s <= cfg.iterations; ++s)
      result.convergence.push_back(
          {s, trans_sys.l1_per_sweep[s].first, visit_sys.l1_per_sweep[s].second});
  }
  return result;
}

Eigen::MatrixXd reconstruct_transition_slice(const FactorMatrices& theta, int n) {
  return (theta.B.array().rowwise() * theta.A.row(n).array()).matrix() * theta.C.transpose();
}

Eigen::MatrixXd reconstruct_visit_slice(const FactorMatrices& theta, int n) {
  return (theta.B.array().rowwise() * theta.A.row(n).array()).matrix() * theta.D.transpose();
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> reconstruct_user(const FactorMatrices& theta, int n) {
  if (n < 0 || n >= theta.A.rows()) throw ContractError("user index out of range");
  return {reconstruct_transition_slice(theta, n), reconstruct_visit_slice(theta, n)};
}

namespace {

struct UnobservedEstimate {
  double scaled_l1 = 0.0;
  std::int64_t unobserved_cells = 0;
};

UnobservedEstimate estimate_unobserved_l1(const FactorMatrices& theta, bool transition,
                                          const SparseCountTensor& tensor, int samples_per_user,
                                          std::uint64_t seed) {
  UnobservedEstimate est;
  const std::int64_t slice_cells = static_cast<std::int64_t>(tensor.rows) * tensor.cols;
  std::vector<double> partial(tensor.users, 0.0);
  std::vector<std::int64_t> unobserved(tensor.users, 0);

  parallel_for(tensor.users, [&](std::int64_t n) {
    std::unordered_set<std::int64_t> observed;
    for (const auto& c : tensor.entries[n])
      observed.insert(static_cast<std::int64_t>(c.i) * tensor.cols + c.j);
    for (const auto& [i, j] : tensor.observed_zeros[n])
      observed.insert(static_cast<std::int64_t>(i) * tensor.cols + j);
    unobserved[n] = slice_cells - static_cast<std::int64_t>(observed.size());
    if (unobserved[n] == 0) return;

    const Eigen::MatrixXd slice = transition ? reconstruct_transition_slice(theta, static_cast<int>(n))
                                             : reconstruct_visit_slice(theta, static_cast<int>(n));
    Rng rng = substream(seed, RngTag::report, static_cast<std::uint64_t>(tensor.kind), n);
    double sum = 0.0;
    for (int s = 0; s < samples_per_user; ++s) {
      std::int64_t key;
      do {
        key = rng.below(slice_cells);
      } while (observed.count(key));
      sum += std::abs(slice(static_cast<int>(key / tensor.cols),
                            static_cast<int>(key % tensor.cols)));
    }
    partial[n] = sum;
  });

  double sampled = 0.0;
  for (int n = 0; n < tensor.users; ++n) {
    sampled += partial[n];
    est.unobserved_cells += unobserved[n];
  }
  const double denom = static_cast<double>(samples_per_user) * tensor.users;
  est.scaled_l1 = denom > 0 ? sampled * (static_cast<double>(est.unobserved_cells) / denom) : 0.0;
  return est;
}

}  // namespace

ReconstructionReport reconstruction_report(const FactorMatrices& trans_theta,
                                           const FactorMatrices& visit_theta,
                                           const TensorPair& tensors, int samples_per_user,
                                           std::uint64_t seed) {
  if (samples_per_user <= 0) throw ConfigError("samples_per_user must be positive");
  ReconstructionReport report;
  const ObservedCells trans_cells = ObservedCells::from(tensors.trans);
  const ObservedCells visit_cells = ObservedCells::from(tensors.visit);
  report.observed_l1_trans = observed_l1(trans_cells, trans_theta.A, trans_theta.B, trans_theta.C);
  report.observed_l1_visit = observed_l1(visit_cells, visit_theta.A, visit_theta.B, visit_theta.D);

  const auto trans_est =
      estimate_unobserved_l1(trans_theta, true, tensors.trans, samples_per_user, seed);
  const auto visit_est =
      estimate_unobserved_l1(visit_theta, false, tensors.visit, samples_per_user, seed);
  report.unobserved_l1_trans = trans_est.scaled_l1;
  report.unobserved_cells_trans = trans_est.unobserved_cells;
  report.unobserved_l1_visit = visit_est.scaled_l1;
  report.unobserved_cells_visit = visit_est.unobserved_cells;
  return report;
}

}  // namespace ppmtf
