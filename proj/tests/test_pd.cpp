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

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "ppmtf/pd.hpp"

using namespace ppmtf;

namespace {

// five-user toy world on 3 locations and 3 instants
struct ToyWorld {
  TimeSlotMap time = TimeSlotMap::identity(3);
  std::vector<MarkovGenerator> gens;

  ToyWorld() {
    const FactorMatrices theta = init_factors(5, 3, 3, 2, 31);
    for (int n = 0; n < 5; ++n) gens.push_back(build_generator(theta, n, time, 1e-8));
  }

  std::vector<double> probabilities(const Trace& y) const {
    std::vector<double> probs;
    for (const auto& gen : gens) probs.push_back(std::exp(trace_log_probability(gen, y, time)));
    return probs;
  }
};

}  // namespace

TEST_SUITE("pd") {
  TEST_CASE("bucket index boundaries") {
    CHECK(bucket_index(1.0, 1.0) == 0);
    CHECK(bucket_index(std::exp(-1.0), 1.0) == 1);  // upper bound inclusive
    CHECK(bucket_index(std::exp(-1.5), 1.0) == 1);
    CHECK(bucket_index(std::exp(-0.25), 0.5) == 0);
    CHECK(bucket_index(0.9999999, 2.0) == 0);
    CHECK_THROWS_AS(bucket_index(0.0, 1.0), ContractError);
    CHECK_THROWS_AS(bucket_index(1.5, 1.0), ContractError);
    CHECK_THROWS_AS(bucket_index(0.5, 0.0), ContractError);
  }

  TEST_CASE("bucket index agrees with the inequality scan") {
    Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
      const double p = std::exp(-8.0 * rng.uniform01());
      for (double eta : {0.5, 1.0, 2.0})
        CHECK(bucket_index(p, eta) == oracle::pd_bucket_scan(p, eta));
    }
  }

  TEST_CASE("k = 1 always passes") {
    const ToyWorld world;
    Rng rng(3);
    const Trace y = synthesize_trace(world.gens[2], world.time, 3, rng);
    PDConfig cfg;
    cfg.k = 1;
    cfg.subset_size = 5;
    Rng test_rng(9);
    const PDResult result = run_pd_test(
        y, 2, 5, [&](int m) -> const MarkovGenerator& { return world.gens[m]; }, world.time, cfg,
        test_rng);
    CHECK(result.pass);
    CHECK(result.count == 1);
    CHECK(result.tested == 1);  // early exit before any other user
  }

  TEST_CASE("toy world agrees with the brute-force inequalities") {
    const ToyWorld world;
    int checked = 0;
    for (int input = 0; input < 5; ++input) {
      for (std::uint64_t yseed = 0; yseed < 6; ++yseed) {
        Rng rng = substream(yseed, RngTag::synthesis, input);
        const Trace y = synthesize_trace(world.gens[input], world.time, 3, rng);
        const std::vector<double> probs = world.probabilities(y);
        for (double eta : {0.5, 1.0, 2.0}) {
          const oracle::PdOracle expected = oracle::pd_bruteforce(probs, input, eta);
          for (int k = 1; k <= 5; ++k) {
            PDConfig cfg;
            cfg.k = k;
            cfg.eta = eta;
            cfg.subset_size = 5;  // the whole population
            cfg.seed = 1;
            Rng test_rng(1);
            const PDResult result = run_pd_test(
                y, input, 5, [&](int m) -> const MarkovGenerator& { return world.gens[m]; },
                world.time, cfg, test_rng);
            CHECK(result.bucket == expected.bucket);
            CHECK(result.pass == (expected.matches >= k));
            ++checked;
          }
        }
      }
    }
    CHECK(checked == 5 * 6 * 3 * 5);
  }

  TEST_CASE("pass at k implies pass at smaller k") {
    const ToyWorld world;
    Rng rng(12);
    const Trace y = synthesize_trace(world.gens[0], world.time, 3, rng);
    bool passed_above = false;
    for (int k = 5; k >= 1; --k) {
      PDConfig cfg;
      cfg.k = k;
      cfg.subset_size = 5;
      Rng test_rng(4);
      const PDResult result = run_pd_test(
          y, 0, 5, [&](int m) -> const MarkovGenerator& { return world.gens[m]; }, world.time,
          cfg, test_rng);
      if (passed_above) CHECK(result.pass);
      passed_above = passed_above || result.pass;
    }
  }

  TEST_CASE("subset selection is fixed by seed and size") {
    const std::vector<int> a = draw_user_subset(100, 20, 7);
    const std::vector<int> b = draw_user_subset(100, 20, 7);
    const std::vector<int> c = draw_user_subset(100, 20, 8);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 20);
    std::set<int> distinct(a.begin(), a.end());
    CHECK(distinct.size() == 20);
  }

  TEST_CASE("batch results equal per-trace results") {
    const ToyWorld world;
    std::vector<Trace> traces;
    std::vector<int> inputs;
    for (int input = 0; input < 5; ++input) {
      Rng rng = substream(50, RngTag::synthesis, input);
      traces.push_back(synthesize_trace(world.gens[input], world.time, 3, rng));
      inputs.push_back(input);
    }
    PDConfig cfg;
    cfg.k = 2;
    cfg.eta = 1.0;
    cfg.subset_size = 3;
    cfg.seed = 13;

    const std::vector<PDResult> batch = run_pd_batch(
        5, inputs, 5,
        [&](int user, std::vector<double>& out) {
          for (int t = 0; t < 5; ++t)
            out[t] = trace_log_probability(world.gens[user], traces[t], world.time);
        },
        cfg);

    const std::vector<int> subset = draw_user_subset(5, 3, cfg.seed);
    for (int t = 0; t < 5; ++t) {
      const PDResult single = run_pd_test_ordered(
          [&](int m) { return trace_log_probability(world.gens[m], traces[t], world.time); },
          inputs[t], subset, cfg.k, cfg.eta);
      CHECK(batch[t].pass == single.pass);
      CHECK(batch[t].bucket == single.bucket);
      CHECK(batch[t].count == single.count);
      CHECK(batch[t].tested == single.tested);
    }
  }

  TEST_CASE("pass rate arithmetic") {
    std::vector<PDResult> results(10);
    for (int i = 0; i < 7; ++i) results[i].pass = true;
    CHECK(pd_pass_rate(results) == doctest::Approx(0.7));
    for (auto& r : results) r.pass = true;
    CHECK(pd_pass_rate(results) == doctest::Approx(1.0));
    CHECK_THROWS_AS(pd_pass_rate({}), ContractError);
  }

  TEST_CASE("pass rate falls as k grows") {
    const ToyWorld world;
    std::vector<Trace> traces;
    std::vector<int> inputs;
    for (int input = 0; input < 5; ++input)
      for (int r = 0; r < 10; ++r) {
        Rng rng = substream(60, RngTag::synthesis, input, r);
        traces.push_back(synthesize_trace(world.gens[input], world.time, 3, rng));
        inputs.push_back(input);
      }
    double previous = 1.1;
    for (int k : {1, 2, 3, 4, 5}) {
      PDConfig cfg;
      cfg.k = k;
      cfg.subset_size = 5;
      const std::vector<PDResult> results = run_pd_batch(
          static_cast<int>(traces.size()), inputs, 5,
          [&](int user, std::vector<double>& out) {
            for (std::size_t t = 0; t < traces.size(); ++t)
              out[t] = trace_log_probability(world.gens[user], traces[t], world.time);
          },
          cfg);
      const double rate = pd_pass_rate(results);
      CHECK(rate <= previous + 1e-12);
      previous = rate;
    }
  }
}
