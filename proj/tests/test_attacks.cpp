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

#include <doctest.h>

#include "ppmtf/attacks.hpp"
#include "ppmtf/rng.hpp"

using namespace ppmtf;

namespace {

Trace loop_trace(int location_a, int location_b, int length) {
  Trace tr;
  for (int t = 0; t < length; ++t) tr.events.push_back({t, t % 2 == 0 ? location_a : location_b});
  return tr;
}

}  // namespace

TEST_SUITE("attacks") {
  TEST_CASE("separable users re-identify correctly") {
    // three users living on disjoint location pairs
    std::vector<Trace> traces = {loop_trace(0, 1, 8), loop_trace(2, 3, 8), loop_trace(4, 5, 8)};
    const AttackModel model = build_attack_model(traces, 6);
    CHECK(reidentify(loop_trace(0, 1, 6), model, 3) == 0);
    CHECK(reidentify(loop_trace(2, 3, 6), model, 3) == 1);
    CHECK(reidentify(loop_trace(4, 5, 6), model, 3) == 2);
  }

  TEST_CASE("identical models tie-break to the lowest user") {
    std::vector<Trace> traces = {loop_trace(0, 1, 8), loop_trace(0, 1, 8), loop_trace(0, 1, 8)};
    const AttackModel model = build_attack_model(traces, 3);
    CHECK(reidentify(loop_trace(0, 1, 6), model, 3) == 0);
  }

  TEST_CASE("unseen transitions score the floor, not zero") {
    std::vector<Trace> traces = {loop_trace(0, 1, 8)};
    const AttackModel model = build_attack_model(traces, 3);
    // row 0 is trained as a point mass on location 1, so the self loop
    // 0 -> 0 can only be scored through the floor
    Trace unseen = loop_trace(0, 0, 2);
    const double ll = transition_log_likelihood(unseen, model.w[0]);
    CHECK(std::isfinite(ll));
    CHECK(ll == doctest::Approx(std::log(1e-8)).epsilon(1e-4));
  }

  TEST_CASE("traces without transitions cannot be scored") {
    std::vector<Trace> traces = {loop_trace(0, 1, 8)};
    const AttackModel model = build_attack_model(traces, 2);
    Trace sparse;
    sparse.events = {{0, 1}, {5, 0}};  // gap, no adjacent pair
    CHECK_THROWS_AS(transition_log_likelihood(sparse, model.w[0]), ContractError);
    CHECK_THROWS_AS(reidentify(sparse, model, 1), ContractError);
  }

  TEST_CASE("re-identification rate arithmetic") {
    CHECK(reid_rate({{1, 1}, {2, 2}}) == doctest::Approx(1.0));
    CHECK(reid_rate({{1, 2}, {2, 1}}) == doctest::Approx(0.0));
    CHECK(reid_rate({{1, 1}, {2, 1}}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(reid_rate({}), ContractError);
  }

  TEST_CASE("random assignment hits one over the candidate count") {
    Rng rng(15);
    const int users = 40;
    std::vector<std::pair<int, int>> assignments;
    for (int t = 0; t < 40000; ++t)
      assignments.emplace_back(static_cast<int>(rng.below(users)), t % users);
    const double expected = 1.0 / users;
    const double sigma = std::sqrt(expected * (1.0 - expected) / assignments.size());
    CHECK(std::abs(reid_rate(assignments) - expected) < 4.0 * sigma);
  }

  TEST_CASE("population matrix excludes exactly the target") {
    std::vector<Trace> traces = {loop_trace(0, 1, 8), loop_trace(2, 3, 8), loop_trace(4, 5, 8)};
    const AttackModel model = build_attack_model(traces, 6);
    const Eigen::MatrixXd pop = model.population_excluding(1);
    const Eigen::MatrixXd expected = (model.w[0] + model.w[2]) / 2.0;
    CHECK((pop - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("membership inference on a separable world") {
    // members 0..2 on disjoint pairs; non-members 3..5 on other pairs
    std::vector<Trace> traces = {loop_trace(0, 1, 10), loop_trace(2, 3, 10),
                                 loop_trace(4, 5, 10), loop_trace(6, 7, 10),
                                 loop_trace(8, 9, 10), loop_trace(10, 11, 10)};
    const AttackModel model = build_attack_model(traces, 12);

    // synthetic traces replay the members' behavior
    std::vector<Trace> synthetic = {loop_trace(0, 1, 10), loop_trace(2, 3, 10),
                                    loop_trace(4, 5, 10)};
    MembershipConfig cfg;
    cfg.members = {0, 1, 2};
    cfg.nonmembers = {3, 4, 5};
    const MembershipResult result = membership_advantage(synthetic, model, cfg);
    CHECK(result.best_advantage == doctest::Approx(1.0));
    CHECK(result.best_advantage <= 1.0);
    CHECK(result.best_advantage >= -1.0);

    // accuracy identity under balanced sets: acc = (adv + 1) / 2
    int tp = 0;
    int fp = 0;
    for (std::size_t i = 0; i < 6; ++i)
      if (result.scores[i] >= result.best_threshold) (i < 3 ? tp : fp) += 1;
    const double accuracy = (tp + (3 - fp)) / 6.0;
    CHECK(accuracy == doctest::Approx((result.best_advantage + 1.0) / 2.0));
  }

  TEST_CASE("an always-member classifier has zero advantage") {
    std::vector<Trace> traces = {loop_trace(0, 1, 10), loop_trace(0, 1, 10),
                                 loop_trace(0, 1, 10), loop_trace(0, 1, 10)};
    const AttackModel model = build_attack_model(traces, 2);
    std::vector<Trace> synthetic = {loop_trace(0, 1, 10)};
    MembershipConfig cfg;
    cfg.members = {0, 1};
    cfg.nonmembers = {2, 3};
    cfg.thresholds = {-1e30};  // everyone declared a member
    const MembershipResult result = membership_advantage(synthetic, model, cfg);
    CHECK(result.best_advantage == doctest::Approx(0.0));
  }

  TEST_CASE("traces without transitions are skipped and counted") {
    std::vector<Trace> traces = {loop_trace(0, 1, 10), loop_trace(2, 3, 10)};
    const AttackModel model = build_attack_model(traces, 4);
    Trace sparse;
    sparse.events = {{0, 0}};
    std::vector<Trace> synthetic = {sparse, loop_trace(0, 1, 6)};
    MembershipConfig cfg;
    cfg.members = {0};
    cfg.nonmembers = {1};
    const MembershipResult result = membership_advantage(synthetic, model, cfg);
    CHECK(result.skipped_traces == 1);
  }

  TEST_CASE("overlapping member sets are rejected") {
    std::vector<Trace> traces = {loop_trace(0, 1, 10), loop_trace(2, 3, 10)};
    const AttackModel model = build_attack_model(traces, 4);
    MembershipConfig cfg;
    cfg.members = {0};
    cfg.nonmembers = {0};
    CHECK_THROWS_AS(membership_advantage({loop_trace(0, 1, 4)}, model, cfg), ConfigError);
  }
}
