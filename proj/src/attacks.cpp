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

#include "ppmtf/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppmtf/generator.hpp"

namespace ppmtf {

Eigen::MatrixXd AttackModel::population_excluding(int user) const {
  if (users() < 2) throw ContractError("population matrix needs at least two users");
  return (w_sum - w[user]) / static_cast<double>(users() - 1);
}

AttackModel build_attack_model(const std::vector<Trace>& traces, int locations, double floor) {
  AttackModel model;
  model.w.resize(traces.size());
  parallel_for(static_cast<std::int64_t>(traces.size()), [&](std::int64_t n) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(locations, locations);
    const auto& events = traces[n].events;
    for (std::size_t e = 1; e < events.size(); ++e)
      if (events[e - 1].instant + 1 == events[e].instant)
        counts(events[e - 1].location, events[e].location) += 1.0;
    for (int a = 0; a < locations; ++a) {
      const double row_sum = counts.row(a).sum();
      if (row_sum > 0.0) counts.row(a) /= row_sum;
      // all-zero rows become uniform through the floor below
    }
    model.w[n] = normalize_rows_with_floor(std::move(counts), floor);
  });
  model.w_sum = Eigen::MatrixXd::Zero(locations, locations);
  for (const auto& w : model.w) model.w_sum += w;
  return model;
}

double transition_log_likelihood(const Trace& y, const Eigen::MatrixXd& w) {
  double log_lik = 0.0;
  bool any = false;
  for (std::size_t e = 1; e < y.events.size(); ++e) {
    if (y.events[e - 1].instant + 1 != y.events[e].instant) continue;
    log_lik += std::log(w(y.events[e - 1].location, y.events[e].location));
    any = true;
  }
  if (!any) throw ContractError("trace has no transition to score");
  return log_lik;
}

int reidentify(const Trace& y, const AttackModel& model, int candidate_count) {
  if (candidate_count < 1 || candidate_count > model.users())
    throw ContractError("bad candidate count");
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < candidate_count; ++m) {
    const double ll = transition_log_likelihood(y, model.w[m]);
    if (ll > best_ll) {
      best_ll = ll;
      best = m;
    }
  }
  return best;
}

double reid_rate(const std::vector<std::pair<int, int>>& assignments) {
  if (assignments.empty()) throw ContractError("re-identification rate of an empty list");
  std::int64_t correct = 0;
  for (const auto& [predicted, truth] : assignments) correct += predicted == truth ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(assignments.size());
}

MembershipResult membership_advantage(const std::vector<Trace>& synthetic,
                                      const AttackModel& model, const MembershipConfig& cfg) {
  if (synthetic.empty()) throw ContractError("membership inference needs synthetic traces");
  for (int m : cfg.members)
    for (int nm : cfg.nonmembers)
      if (m == nm) throw ConfigError("member and non-member sets overlap");

  // traces that carry at least one transition
  std::vector<const Trace*> usable;
  int skipped = 0;
  for (const Trace& y : synthetic) {
    bool any = false;
    for (std::size_t e = 1; e < y.events.size(); ++e)
      if (y.events[e - 1].instant + 1 == y.events[e].instant) any = true;
    if (any)
      usable.push_back(&y);
    else
      ++skipped;
  }
  if (usable.empty()) throw ContractError("no synthetic trace has a transition");

  std::vector<int> candidates = cfg.members;
  candidates.insert(candidates.end(), cfg.nonmembers.begin(), cfg.nonmembers.end());

  MembershipResult result;
  result.skipped_traces = skipped;
  result.scores.assign(candidates.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(candidates.size()), [&](std::int64_t idx) {
    const int v = candidates[idx];
    const Eigen::MatrixXd population = model.population_excluding(v);
    double best = -std::numeric_limits<double>::infinity();
    for (const Trace* y : usable) {
      const double ratio =
          transition_log_likelihood(*y, model.w[v]) - transition_log_likelihood(*y, population);
      best = std::max(best, ratio);
    }
    result.scores[idx] = best;
  });

  std::vector<double> thresholds = cfg.thresholds;
  if (thresholds.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(result.scores.begin(), result.scores.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double pad = (hi - lo) * 1e-6 + 1e-12;
    thresholds.reserve(201);
    for (int i = 0; i < 201; ++i)
      thresholds.push_back(lo + (hi + pad - lo) * static_cast<double>(i) / 200.0);
  }

  const std::size_t member_count = cfg.members.size();
  result.best_advantage = -std::numeric_limits<double>::infinity();
  for (double psi : thresholds) {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
      const bool declared = result.scores[idx] >= psi;
      if (!declared) continue;
      if (idx < member_count)
        ++tp;
      else
        ++fp;
    }
    const double tpr = member_count ? static_cast<double>(tp) / member_count : 0.0;
    const double fpr =
        cfg.nonmembers.empty() ? 0.0 : static_cast<double>(fp) / cfg.nonmembers.size();
    const double advantage = tpr - fpr;
    result.curve.emplace_back(psi, advantage);
    if (advantage > result.best_advantage) {
      result.best_advantage = advantage;
      result.best_threshold = psi;
    }
  }
  return result;
}

}  // namespace ppmtf
