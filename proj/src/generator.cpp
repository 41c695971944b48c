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

#include "ppmtf/generator.hpp"

#include <algorithm>
#include <cmath>

namespace ppmtf {
namespace {

constexpr double kRowSumSlack = 1e-12;

void check_floor(double phi) {
  if (!(phi > 0.0)) throw ConfigError("floor phi must be positive");
}

// First index whose cumulative mass reaches u; `row` must be a
// probability vector.
int draw_categorical(const Eigen::VectorXd& row, double u) {
  double acc = 0.0;
  const int n = static_cast<int>(row.size());
  for (int i = 0; i < n; ++i) {
    acc += row(i);
    if (u <= acc) return i;
  }
  return n - 1;  // u beyond accumulated rounding
}

}  // namespace

Eigen::MatrixXd normalize_rows_with_floor(Eigen::MatrixXd m, double phi) {
  check_floor(phi);
  m = m.cwiseMax(phi);
  for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) /= m.row(r).sum();
  return m;
}

Eigen::VectorXd normalize_with_floor(Eigen::VectorXd v, double phi) {
  check_floor(phi);
  v = v.cwiseMax(phi);
  return v / v.sum();
}

Eigen::MatrixXd mh_adjust(const Eigen::MatrixXd& q_star, const Eigen::VectorXd& pi) {
  const int n = static_cast<int>(q_star.rows());
  if (q_star.cols() != n || pi.size() != n) throw ContractError("mh_adjust shape mismatch");
  if ((q_star.array() <= 0.0).any() || (pi.array() <= 0.0).any())
    throw ContractError("mh_adjust needs strictly positive proposal and target");

  Eigen::MatrixXd q(n, n);
  for (int a = 0; a < n; ++a) {
    double off_diagonal = 0.0;
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      const double accept = std::min(1.0, pi(b) * q_star(b, a) / (pi(a) * q_star(a, b)));
      q(a, b) = q_star(a, b) * accept;
      off_diagonal += q(a, b);
    }
    q(a, a) = 1.0 - off_diagonal;
    const double row_sum = q.row(a).sum();
    if (std::abs(row_sum - 1.0) > kRowSumSlack) q.row(a) /= row_sum;
  }
  return q;
}

MarkovGenerator build_generator(const FactorMatrices& theta, const FactorMatrices& visit_theta,
                                int user, const TimeSlotMap& time, double phi) {
  check_floor(phi);
  if (user < 0 || user >= theta.A.rows()) throw ContractError("user index out of range");

  MarkovGenerator gen;
  gen.user = user;
  gen.floor = phi;
  gen.q_star = normalize_rows_with_floor(reconstruct_transition_slice(theta, user), phi);

  const Eigen::MatrixXd visit_slice = reconstruct_visit_slice(visit_theta, user);
  const int slots = time.slot_count();
  gen.pi.resize(slots);
  gen.q.resize(slots);
  for (int s = 0; s < slots; ++s) {
    gen.pi[s] = normalize_with_floor(visit_slice.col(s), phi);
    gen.q[s] = mh_adjust(gen.q_star, gen.pi[s]);
  }
  return gen;
}

MarkovGenerator build_generator(const FactorMatrices& theta, int user, const TimeSlotMap& time,
                                double phi) {
  return build_generator(theta, theta, user, time, phi);
}

Trace synthesize_trace(const MarkovGenerator& gen, const TimeSlotMap& time, int length, Rng& rng) {
  if (length <= 0 || length > time.instant_count())
    throw ContractError("trace length outside [1, instant count]");
  Trace trace;
  trace.user = gen.user;
  trace.events.reserve(length);

  int prev = draw_categorical(gen.pi[time.slot_of(0)], rng.uniform01());
  trace.events.push_back({0, prev});
  for (int t = 1; t < length; ++t) {
    const Eigen::VectorXd row = gen.q[time.slot_of(t)].row(prev).transpose();
    prev = draw_categorical(row, rng.uniform01());
    trace.events.push_back({t, prev});
  }
  return trace;
}

double trace_log_probability(const MarkovGenerator& gen, const Trace& trace,
                             const TimeSlotMap& time) {
  if (trace.events.empty()) throw ContractError("empty trace has no probability");
  if (!trace.gap_free()) throw ContractError("trace probability needs a gap-free trace");

  const Event& first = trace.events.front();
  double log_p = std::log(gen.pi[time.slot_of(first.instant)](first.location));
  for (std::size_t e = 1; e < trace.events.size(); ++e) {
    const Event& cur = trace.events[e];
    const Event& prev = trace.events[e - 1];
    log_p += std::log(gen.q[time.slot_of(cur.instant)](prev.location, cur.location));
  }
  return log_p;
}

}  // namespace ppmtf
