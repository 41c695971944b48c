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

#include "oracles.hpp"
#include "ppmtf/generator.hpp"
#include "ppmtf/serial_ref.hpp"

using namespace ppmtf;

namespace {

MarkovGenerator random_generator(int locations, int slots, std::uint64_t seed, int z = 4) {
  const FactorMatrices theta = init_factors(3, locations, slots, z, seed);
  return build_generator(theta, 0, TimeSlotMap::contiguous(slots * 2, 2), 1e-8);
}

}  // namespace

TEST_SUITE("generator") {
  TEST_CASE("floor normalization") {
    SUBCASE("an all-zero row becomes uniform") {
      const Eigen::MatrixXd m = normalize_rows_with_floor(Eigen::MatrixXd::Zero(1, 4), 1e-8);
      for (int j = 0; j < 4; ++j) CHECK(m(0, j) == doctest::Approx(0.25));
    }
    SUBCASE("the floor is inactive on healthy rows") {
      Eigen::MatrixXd row(1, 3);
      row << 2.0, 1.0, 1.0;
      const Eigen::MatrixXd m = normalize_rows_with_floor(row, 1e-8);
      CHECK(std::abs(m(0, 0) - 0.5) < 1e-12);
      CHECK(std::abs(m(0, 1) - 0.25) < 1e-12);
    }
    SUBCASE("negatives and tiny values are floored before normalizing") {
      Eigen::VectorXd v(3);
      v << 1.0, -0.5, 1e-9;
      const Eigen::VectorXd p = normalize_with_floor(v, 1e-8);
      CHECK(p(1) == doctest::Approx(1e-8 / (1.0 + 2e-8)));
      CHECK(p(2) == p(1));
      CHECK(p.sum() == doctest::Approx(1.0));
      CHECK(p.minCoeff() > 0.0);
    }
  }

  TEST_CASE("MH adjustment") {
    SUBCASE("uniform proposal with uniform target is unchanged") {
      const Eigen::MatrixXd q_star = Eigen::MatrixXd::Constant(4, 4, 0.25);
      const Eigen::VectorXd pi = Eigen::VectorXd::Constant(4, 0.25);
      const Eigen::MatrixXd q = mh_adjust(q_star, pi);
      CHECK((q - q_star).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("two-state hand computation") {
      const Eigen::MatrixXd q_star = Eigen::MatrixXd::Constant(2, 2, 0.5);
      Eigen::VectorXd pi(2);
      pi << 0.75, 0.25;
      const Eigen::MatrixXd q = mh_adjust(q_star, pi);
      CHECK(q(0, 0) == doctest::Approx(5.0 / 6.0));
      CHECK(q(0, 1) == doctest::Approx(1.0 / 6.0));
      CHECK(q(1, 0) == doctest::Approx(0.5));
      CHECK(q(1, 1) == doctest::Approx(0.5));
      CHECK((pi.transpose() * q - pi.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("random regular chains converge to the target") {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd raw(10, 10);
        Eigen::VectorXd target_raw(10);
        for (int i = 0; i < 10; ++i) {
          target_raw(i) = rng.uniform01() + 0.05;
          for (int j = 0; j < 10; ++j) raw(i, j) = rng.uniform01() + 0.05;
        }
        const Eigen::MatrixXd q_star = normalize_rows_with_floor(raw, 1e-8);
        const Eigen::VectorXd pi = normalize_with_floor(target_raw, 1e-8);
        const Eigen::MatrixXd q = mh_adjust(q_star, pi);
        CHECK(oracle::power_iteration_residual(q, pi) < 1e-6);
        // no off-diagonal mass is created from nothing
        for (int a = 0; a < 10; ++a)
          for (int b = 0; b < 10; ++b)
            if (a != b) CHECK(q(a, b) <= q_star(a, b) + 1e-15);
      }
    }
    SUBCASE("non-positive inputs are rejected") {
      Eigen::MatrixXd q_star = Eigen::MatrixXd::Constant(2, 2, 0.5);
      Eigen::VectorXd pi(2);
      pi << 1.0, 0.0;
      CHECK_THROWS_AS(mh_adjust(q_star, pi), ContractError);
    }
  }

  TEST_CASE("generator construction invariants") {
    SUBCASE("all-zero factors give uniform everything") {
      FactorMatrices theta;
      theta.A = Eigen::MatrixXd::Zero(1, 2);
      theta.B = Eigen::MatrixXd::Zero(3, 2);
      theta.C = Eigen::MatrixXd::Zero(3, 2);
      theta.D = Eigen::MatrixXd::Zero(2, 2);
      const MarkovGenerator gen =
          build_generator(theta, 0, TimeSlotMap::contiguous(4, 2), 1e-8);
      CHECK(gen.q_star(0, 0) == doctest::Approx(1.0 / 3.0));
      CHECK(gen.pi[1](2) == doctest::Approx(1.0 / 3.0));
      CHECK(gen.q[0](1, 2) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("invariants hold for random trained factors") {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const MarkovGenerator gen = random_generator(12, 3, seed);
        CHECK(gen.slots() == 3);
        CHECK(static_cast<int>(gen.pi.size()) == 3);
        for (int s = 0; s < gen.slots(); ++s) {
          CHECK(gen.pi[s].minCoeff() > 0.0);
          CHECK(gen.pi[s].sum() == doctest::Approx(1.0).epsilon(1e-9));
          for (int a = 0; a < gen.locations(); ++a)
            CHECK(gen.q[s].row(a).sum() == doctest::Approx(1.0).epsilon(1e-9));
          CHECK(gen.q[s].minCoeff() > 0.0);
          // exact algebraic stationarity
          const double residual =
              (gen.pi[s].transpose() * gen.q[s] - gen.pi[s].transpose()).cwiseAbs().sum();
          CHECK(residual < 1e-9);
        }
      }
    }
  }

  TEST_CASE("synthesis covers every instant and matches the target marginals") {
    const int locations = 3;
    const TimeSlotMap time = TimeSlotMap::contiguous(9, 3);
    const FactorMatrices theta = init_factors(2, locations, time.slot_count(), 3, 21);
    const MarkovGenerator gen = build_generator(theta, 1, time, 1e-8);

    SUBCASE("single-instant trace draws from the first slot target") {
      std::vector<int> hits(locations, 0);
      const int draws = 100000;
      for (int s = 0; s < draws; ++s) {
        Rng rng = substream(5, RngTag::synthesis, s);
        const Trace tr = synthesize_trace(gen, time, 1, rng);
        REQUIRE(tr.events.size() == 1);
        ++hits[tr.events[0].location];
      }
      for (int x = 0; x < locations; ++x) {
        const double p = gen.pi[0](x);
        const double sigma = std::sqrt(draws * p * (1.0 - p));
        CHECK(std::abs(hits[x] - draws * p) < 4.0 * sigma);
      }
    }

    SUBCASE("full-length traces are gap-free and valid") {
      Rng rng(3);
      const Trace tr = synthesize_trace(gen, time, time.instant_count(), rng);
      CHECK(tr.events.size() == 9);
      CHECK(tr.gap_free());
      CHECK(tr.events.front().instant == 0);
      CHECK(tr.user == 1);
    }

    SUBCASE("a later instant draws from its slot's adjusted matrix") {
      // frequency of the location at instant 7 given the location at 6,
      // against the slot-2 matrix row
      std::vector<std::vector<int>> hits(locations, std::vector<int>(locations, 0));
      std::vector<int> given(locations, 0);
      const int draws = 60000;
      for (int s = 0; s < draws; ++s) {
        Rng rng = substream(11, RngTag::synthesis, s);
        const Trace tr = synthesize_trace(gen, time, 9, rng);
        const int prev = tr.events[6].location;
        ++given[prev];
        ++hits[prev][tr.events[7].location];
      }
      for (int a = 0; a < locations; ++a) {
        if (given[a] < 2000) continue;
        for (int b = 0; b < locations; ++b) {
          const double p = gen.q[time.slot_of(7)](a, b);
          const double sigma = std::sqrt(given[a] * p * (1.0 - p));
          CHECK(std::abs(hits[a][b] - given[a] * p) < 4.5 * sigma);
        }
      }
    }
  }

  TEST_CASE("trace probabilities") {
    const int locations = 3;
    const TimeSlotMap time = TimeSlotMap::identity(3);
    const FactorMatrices theta = init_factors(1, locations, 3, 2, 8);
    const MarkovGenerator gen = build_generator(theta, 0, time, 1e-8);

    SUBCASE("uniform generator scores every trace equally") {
      FactorMatrices zero;
      zero.A = Eigen::MatrixXd::Zero(1, 2);
      zero.B = Eigen::MatrixXd::Zero(locations, 2);
      zero.C = Eigen::MatrixXd::Zero(locations, 2);
      zero.D = Eigen::MatrixXd::Zero(3, 2);
      const MarkovGenerator uniform = build_generator(zero, 0, time, 1e-8);
      Trace tr;
      tr.events = {{0, 2}, {1, 0}, {2, 1}};
      CHECK(trace_log_probability(uniform, tr, time) ==
            doctest::Approx(-3.0 * std::log(3.0)).epsilon(1e-12));
    }

    SUBCASE("single-event trace scores the visit probability") {
      Trace tr;
      tr.events = {{0, 2}};
      CHECK(trace_log_probability(gen, tr, time) == doctest::Approx(std::log(gen.pi[0](2))));
    }

    SUBCASE("probabilities over all traces sum to one") {
      double total = 0.0;
      for (const Trace& tr : oracle::enumerate_traces(locations, 3))
        total += std::exp(trace_log_probability(gen, tr, time));
      CHECK(std::abs(total - 1.0) < 1e-10);
    }

    SUBCASE("log probability equals the log of the direct product") {
      Rng rng(17);
      for (int trial = 0; trial < 20; ++trial) {
        const Trace tr = synthesize_trace(gen, time, 3, rng);
        const double direct = serial::trace_probability_direct(gen, tr, time);
        CHECK(trace_log_probability(gen, tr, time) ==
              doctest::Approx(std::log(direct)).epsilon(1e-10));
      }
    }

    SUBCASE("gaps violate the contract") {
      Trace tr;
      tr.events = {{0, 1}, {2, 1}};
      CHECK_THROWS_AS(trace_log_probability(gen, tr, time), ContractError);
    }
  }
}
