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

#include "ppmtf/serial_ref.hpp"

#include <cmath>
#include <map>

namespace ppmtf::serial {

Eigen::MatrixXd reconstruct_transition_slice(const FactorMatrices& theta, int n) {
  const int locations = static_cast<int>(theta.B.rows());
  const int z = theta.factors();
  Eigen::MatrixXd slice(locations, locations);
  for (int i = 0; i < locations; ++i)
    for (int j = 0; j < locations; ++j) {
      double sum = 0.0;
      for (int k = 0; k < z; ++k) sum += theta.A(n, k) * theta.B(i, k) * theta.C(j, k);
      slice(i, j) = sum;
    }
  return slice;
}

Eigen::MatrixXd reconstruct_visit_slice(const FactorMatrices& theta, int n) {
  const int locations = static_cast<int>(theta.B.rows());
  const int slots = static_cast<int>(theta.D.rows());
  const int z = theta.factors();
  Eigen::MatrixXd slice(locations, slots);
  for (int i = 0; i < locations; ++i)
    for (int j = 0; j < slots; ++j) {
      double sum = 0.0;
      for (int k = 0; k < z; ++k) sum += theta.A(n, k) * theta.B(i, k) * theta.D(j, k);
      slice(i, j) = sum;
    }
  return slice;
}

namespace {

void accumulate_cells(std::span<const ObservedCells::Ref> cells, const Eigen::MatrixXd& first,
                      const Eigen::MatrixXd& second, double alpha, Eigen::MatrixXd& lambda,
                      Eigen::VectorXd& rhs) {
  const int z = static_cast<int>(lambda.rows());
  std::vector<double> v(z);
  for (const auto& ref : cells) {
    for (int k = 0; k < z; ++k) v[k] = first(ref.a, k) * second(ref.b, k);
    for (int k = 0; k < z; ++k) {
      for (int l = 0; l < z; ++l) lambda(k, l) += alpha * v[k] * v[l];
      rhs(k) += alpha * ref.value * v[k];
    }
  }
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd> row_posterior(FactorId target, int row,
                                                          const ObservedCells* trans,
                                                          const ObservedCells* visit,
                                                          const FactorMatrices& theta,
                                                          const NormalWishart& hp, double alpha) {
  Eigen::MatrixXd lambda = hp.precision;
  Eigen::VectorXd rhs = hp.precision * hp.mu;
  switch (target) {
    case FactorId::a:
      if (trans) accumulate_cells(trans->user_cells(row), theta.B, theta.C, alpha, lambda, rhs);
      if (visit) accumulate_cells(visit->user_cells(row), theta.B, theta.D, alpha, lambda, rhs);
      break;
    case FactorId::b:
      if (trans) accumulate_cells(trans->row_cells(row), theta.A, theta.C, alpha, lambda, rhs);
      if (visit) accumulate_cells(visit->row_cells(row), theta.A, theta.D, alpha, lambda, rhs);
      break;
    case FactorId::c:
      if (trans) accumulate_cells(trans->col_cells(row), theta.A, theta.B, alpha, lambda, rhs);
      break;
    case FactorId::d:
      if (visit) accumulate_cells(visit->col_cells(row), theta.A, theta.B, alpha, lambda, rhs);
      break;
  }
  return {std::move(lambda), std::move(rhs)};
}

Eigen::MatrixXd mh_adjust(const Eigen::MatrixXd& q_star, const Eigen::VectorXd& pi) {
  const int n = static_cast<int>(q_star.rows());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const double ratio = pi(b) * q_star(b, a) / (pi(a) * q_star(a, b));
      q(a, b) = q_star(a, b) * (ratio < 1.0 ? ratio : 1.0);
    }
    double off = 0.0;
    for (int b = 0; b < n; ++b) off += q(a, b);
    q(a, a) = 1.0 - off;
  }
  return q;
}

SparseCountTensor build_transition_tensor(const TraceDataset& data) {
  SparseCountTensor t;
  t.kind = TensorKind::transition;
  t.users = data.users();
  t.rows = data.locations.count();
  t.cols = data.locations.count();
  t.entries.resize(t.users);
  t.observed_zeros.resize(t.users);
  for (int n = 0; n < t.users; ++n) {
    std::map<std::pair<int, int>, int> counts;
    const auto& events = data.traces[n].events;
    for (std::size_t e = 1; e < events.size(); ++e)
      if (events[e].instant == events[e - 1].instant + 1)
        ++counts[{events[e - 1].location, events[e].location}];
    for (const auto& [ij, c] : counts) t.entries[n].push_back({ij.first, ij.second, c});
  }
  return t;
}

SparseCountTensor build_visit_tensor(const TraceDataset& data) {
  SparseCountTensor t;
  t.kind = TensorKind::visit;
  t.users = data.users();
  t.rows = data.locations.count();
  t.cols = data.time.slot_count();
  t.entries.resize(t.users);
  t.observed_zeros.resize(t.users);
  for (int n = 0; n < t.users; ++n) {
    std::map<std::pair<int, int>, int> counts;
    for (const Event& e : data.traces[n].events)
      ++counts[{e.location, data.time.slot_of(e.instant)}];
    for (const auto& [ij, c] : counts) t.entries[n].push_back({ij.first, ij.second, c});
  }
  return t;
}

double trace_probability_direct(const MarkovGenerator& gen, const Trace& trace,
                                const TimeSlotMap& time) {
  const Event& first = trace.events.front();
  double p = gen.pi[time.slot_of(first.instant)](first.location);
  for (std::size_t e = 1; e < trace.events.size(); ++e)
    p *= gen.q[time.slot_of(trace.events[e].instant)](trace.events[e - 1].location,
                                                      trace.events[e].location);
  return p;
}

}  // namespace ppmtf::serial
