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

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "ppmtf/tensor.hpp"

using namespace ppmtf;

namespace {

TraceDataset example_world() {
  std::istringstream locs("x1,0,0\nx2,1,0\nx3,2,0\nx4,3,0\nx5,4,0\n");
  const LocationTable table = parse_locations(locs);
  std::istringstream events(
      "u1,0,x2\nu1,1,x3\nu1,2,x4\nu1,4,x3\nu1,5,x4\nu1,6,x5\nu1,8,x5\n"
      "u2,0,x1\nu2,1,x1\nu2,2,x2\nu2,3,x2\nu2,5,x3\nu2,6,x4\nu2,7,x4\nu2,8,x5\n"
      "u3,1,x5\nu3,2,x4\nu3,3,x4\nu3,4,x3\nu3,5,x2\nu3,6,x2\nu3,7,x1\nu3,8,x1\n");
  return parse_traces(events, table, TimeSlotMap::contiguous(9, 3));
}

int cell_count(const SparseCountTensor& t, int n, int i, int j) {
  for (const auto& c : t.entries[n])
    if (c.i == i && c.j == j) return c.count;
  return 0;
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("golden counts from the example world") {
    const TraceDataset data = example_world();
    const SparseCountTensor trans = build_transition_tensor(data);
    const SparseCountTensor visit = build_visit_tensor(data);
    // user u1 moves x3 -> x4 twice and visits x5 twice in the last slot
    CHECK(cell_count(trans, 0, 2, 3) == 2);
    CHECK(cell_count(visit, 0, 4, 2) == 2);
  }

  TEST_CASE("single-event trace yields an all-zero transition slice") {
    std::istringstream locs("x1,0,0\nx2,1,0\n");
    const LocationTable table = parse_locations(locs);
    std::istringstream events("a,3,x2\n");
    const TraceDataset data = parse_traces(events, table, TimeSlotMap::identity(5));
    const SparseCountTensor trans = build_transition_tensor(data);
    CHECK(trans.entries[0].empty());
  }

  TEST_CASE("transition slice matches a brute-force pair scan") {
    const TraceDataset data = example_world();
    const SparseCountTensor trans = build_transition_tensor(data);
    for (int n = 0; n < data.users(); ++n)
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
          CHECK(cell_count(trans, n, i, j) == oracle::transition_count(data, n, i, j));
  }

  TEST_CASE("visit slice row sums count the user's events") {
    const TraceDataset data = example_world();
    const SparseCountTensor visit = build_visit_tensor(data);
    for (int n = 0; n < data.users(); ++n) {
      int total = 0;
      for (const auto& c : visit.entries[n]) total += c.count;
      CHECK(total == static_cast<int>(data.traces[n].events.size()));
      for (int i = 0; i < 5; ++i)
        for (int s = 0; s < 3; ++s)
          CHECK(cell_count(visit, n, i, s) == oracle::visit_count(data, n, i, s));
    }
  }

  TEST_CASE("untrimmed totals equal pair and event counts") {
    const TraceDataset data = example_world();
    const SparseCountTensor trans = build_transition_tensor(data);
    for (int n = 0; n < data.users(); ++n) {
      int pairs = 0;
      const auto& events = data.traces[n].events;
      for (std::size_t e = 1; e < events.size(); ++e)
        if (events[e].instant == events[e - 1].instant + 1) ++pairs;
      int total = 0;
      for (const auto& c : trans.entries[n]) total += c.count;
      CHECK(total == pairs);
    }
  }

  TEST_CASE("trimming leaves small users alone and truncates counts") {
    SparseCountTensor t;
    t.kind = TensorKind::transition;
    t.users = 1;
    t.rows = t.cols = 20;
    t.entries = {{{0, 1, 3}, {2, 2, 15}, {4, 5, 1}}};
    t.observed_zeros.resize(1);

    const SparseCountTensor trimmed = trim_and_truncate(t, 100, 10, 7);
    CHECK(trimmed.entries[0].size() == 3);  // under the cap
    CHECK(cell_count(trimmed, 0, 2, 2) == 10);
    CHECK(cell_count(trimmed, 0, 0, 1) == 3);
  }

  TEST_CASE("trimming keeps a uniform subset of the originals") {
    SparseCountTensor t;
    t.kind = TensorKind::transition;
    t.users = 1;
    t.rows = t.cols = 20;
    t.entries.resize(1);
    t.observed_zeros.resize(1);
    std::set<std::pair<int, int>> originals;
    for (int k = 0; k < 150; ++k) {
      const int i = k / 20;
      const int j = k % 20;
      t.entries[0].push_back({i, j, 1 + k % 5});
      originals.insert({i, j});
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SparseCountTensor trimmed = trim_and_truncate(t, 100, 10, seed);
      CHECK(trimmed.entries[0].size() == 100);
      for (const auto& c : trimmed.entries[0]) CHECK(originals.count({c.i, c.j}) == 1);
    }
  }

  TEST_CASE("zero sampling with no positives is uniform over the slice") {
    SparseCountTensor t;
    t.kind = TensorKind::visit;
    t.users = 1;
    t.rows = 5;
    t.cols = 5;
    t.entries.resize(1);
    t.observed_zeros.resize(1);

    // selection frequency over many seeds, 3 sigma band per cell
    const int trials = 10000;
    const int rho = 3;
    std::vector<int> hits(25, 0);
    for (int seed = 0; seed < trials; ++seed) {
      const SparseCountTensor sampled = sample_zero_elements(t, rho, seed);
      REQUIRE(sampled.observed_zeros[0].size() == rho);
      for (const auto& [i, j] : sampled.observed_zeros[0]) ++hits[i * 5 + j];
    }
    const double expected = trials * rho / 25.0;
    const double sigma = std::sqrt(trials * (rho / 25.0) * (1.0 - rho / 25.0));
    for (int cell = 0; cell < 25; ++cell)
      CHECK(std::abs(hits[cell] - expected) < 3.0 * sigma);
  }

  TEST_CASE("zero sampling avoids positives and hits the exact quota") {
    SparseCountTensor t;
    t.kind = TensorKind::transition;
    t.users = 1;
    t.rows = 1000;
    t.cols = 1000;
    t.entries.resize(1);
    t.observed_zeros.resize(1);
    for (int k = 0; k < 50; ++k) t.entries[0].push_back({k, 3 * k % 1000, 1 + k % 9});

    const SparseCountTensor sampled = sample_zero_elements(t, 1000, 42);
    CHECK(sampled.observed_zeros[0].size() == 1000);
    std::set<std::pair<int, int>> positives;
    for (const auto& c : sampled.entries[0]) positives.insert({c.i, c.j});
    std::set<std::pair<int, int>> zeros(sampled.observed_zeros[0].begin(),
                                        sampled.observed_zeros[0].end());
    CHECK(zeros.size() == 1000);  // distinct
    for (const auto& z : zeros) CHECK(positives.count(z) == 0);
  }

  TEST_CASE("a slice too small for rho zeros is a configuration error") {
    SparseCountTensor t;
    t.kind = TensorKind::visit;
    t.users = 1;
    t.rows = 2;
    t.cols = 2;
    t.entries = {{{0, 0, 1}}};
    t.observed_zeros.resize(1);
    CHECK_THROWS_AS(sample_zero_elements(t, 4, 1), ConfigError);
  }

  TEST_CASE("the full pipeline is deterministic and respects the caps") {
    const TraceDataset data = example_world();
    TrimConfig cfg;
    cfg.lambda_trans = 4;
    cfg.lambda_visit = 4;
    cfg.rmax_trans = 1;
    cfg.rmax_visit = 1;
    cfg.rho_trans = 6;
    cfg.rho_visit = 5;
    cfg.seed = 99;

    const TensorPair a = build_count_tensors(data, cfg);
    const TensorPair b = build_count_tensors(data, cfg);
    for (int n = 0; n < data.users(); ++n) {
      CHECK(a.trans.entries[n].size() <= 4);
      CHECK(a.trans.observed_zeros[n].size() == 6);
      CHECK(a.visit.observed_zeros[n].size() == 5);
      for (const auto& c : a.trans.entries[n]) CHECK(c.count <= 1);
      CHECK(a.trans.entries[n].size() == b.trans.entries[n].size());
      CHECK(a.trans.observed_zeros[n] == b.trans.observed_zeros[n]);
      CHECK(a.visit.observed_zeros[n] == b.visit.observed_zeros[n]);
    }
    a.trans.validate();
    a.visit.validate();
  }

  TEST_CASE("dump format round trips") {
    const TraceDataset data = example_world();
    TrimConfig cfg;
    cfg.rho_trans = 5;
    cfg.rho_visit = 4;
    const TensorPair tensors = build_count_tensors(data, cfg);

    std::ostringstream out;
    write_tensor(out, tensors.trans);
    std::istringstream in(out.str());
    const SparseCountTensor back = read_tensor(in);
    CHECK(back.users == tensors.trans.users);
    CHECK(back.rmax == tensors.trans.rmax);
    for (int n = 0; n < back.users; ++n) {
      REQUIRE(back.entries[n].size() == tensors.trans.entries[n].size());
      for (std::size_t k = 0; k < back.entries[n].size(); ++k) {
        CHECK(back.entries[n][k].i == tensors.trans.entries[n][k].i);
        CHECK(back.entries[n][k].count == tensors.trans.entries[n][k].count);
      }
      CHECK(back.observed_zeros[n] == tensors.trans.observed_zeros[n]);
    }
  }
}
