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

#include <sstream>

#include "oracles.hpp"
#include "ppmtf/sgd.hpp"

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

}  // namespace

TEST_SUITE("sgd") {
  TEST_CASE("a single repeated transition trains to a near point mass") {
    std::istringstream locs("x1,0,0\nx2,1,0\n");
    const LocationTable table = parse_locations(locs);
    std::istringstream events("a,0,x1\na,1,x2\nb,0,x1\nb,1,x2\n");
    const TraceDataset data = parse_traces(events, table, TimeSlotMap::contiguous(2, 2));
    const SgdModel model = train_sgd(data);
    CHECK(model.q[0](0, 1) > 0.999);
    CHECK(model.q[0].row(0).sum() == doctest::Approx(1.0));
  }

  TEST_CASE("slot-pooled counts match a brute-force scan") {
    const TraceDataset data = example_world();
    const SgdModel model = train_sgd(data);
    const int locations = data.locations.count();

    for (int slot = 0; slot < data.time.slot_count(); ++slot) {
      Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(locations, locations);
      for (const Trace& tr : data.traces)
        for (std::size_t a = 0; a < tr.events.size(); ++a)
          for (std::size_t b = 0; b < tr.events.size(); ++b)
            if (tr.events[b].instant == tr.events[a].instant + 1 &&
                data.time.slot_of(tr.events[b].instant) == slot)
              counts(tr.events[a].location, tr.events[b].location) += 1.0;
      for (int a = 0; a < locations; ++a) {
        const double row_sum = counts.row(a).sum();
        if (row_sum == 0.0) continue;
        for (int b = 0; b < locations; ++b)
          CHECK(model.q[slot](a, b) == doctest::Approx(counts(a, b) / row_sum).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("with no copied prefix the input trace is never read") {
    const TraceDataset data = example_world();
    const SgdModel model = train_sgd(data, 0);
    Rng rng_a(5);
    Rng rng_b(5);
    const Trace from_user0 = sgd_synthesize(model, data.traces[0], data.time, 9, rng_a);
    const Trace from_user2 = sgd_synthesize(model, data.traces[2], data.time, 9, rng_b);
    for (std::size_t e = 0; e < from_user0.events.size(); ++e)
      CHECK(from_user0.events[e].location == from_user2.events[e].location);
  }

  TEST_CASE("first location frequencies follow the trained vector") {
    const TraceDataset data = example_world();
    const SgdModel model = train_sgd(data, 0);
    std::vector<int> hits(data.locations.count(), 0);
    const int draws = 50000;
    for (int s = 0; s < draws; ++s) {
      Rng rng = substream(77, RngTag::synthesis, s);
      const Trace tr = sgd_synthesize(model, data.traces[0], data.time, 9, rng);
      ++hits[tr.events[0].location];
    }
    for (int x = 0; x < data.locations.count(); ++x) {
      const double p = model.pi_first(x);
      const double sigma = std::sqrt(draws * p * (1.0 - p));
      CHECK(std::abs(hits[x] - draws * p) < 4.0 * sigma);
    }
  }

  TEST_CASE("full prefix copy of a gap-free input reproduces it") {
    std::istringstream locs("x1,0,0\nx2,1,0\nx3,2,0\n");
    const LocationTable table = parse_locations(locs);
    std::istringstream events("a,0,x1\na,1,x3\na,2,x2\na,3,x2\nb,0,x2\nb,1,x1\nb,2,x1\nb,3,x3\n");
    const TraceDataset data = parse_traces(events, table, TimeSlotMap::contiguous(4, 2));
    const SgdModel model = train_sgd(data, 4);
    Rng rng(1);
    const Trace out = sgd_synthesize(model, data.traces[0], data.time, 4, rng);
    REQUIRE(out.events.size() == 4);
    for (std::size_t e = 0; e < 4; ++e) {
      CHECK(out.events[e].instant == data.traces[0].events[e].instant);
      CHECK(out.events[e].location == data.traces[0].events[e].location);
    }
  }

  TEST_CASE("missing copied instants are generated instead") {
    const TraceDataset data = example_world();
    const SgdModel model = train_sgd(data, 5);
    Rng rng(9);
    // user u1 is missing instant 3 inside the copied prefix
    const Trace out = sgd_synthesize(model, data.traces[0], data.time, 9, rng);
    CHECK(out.events.size() == 9);
    CHECK(out.gap_free());
    CHECK(out.events[0].location == data.traces[0].events[0].location);
    CHECK(out.events[1].location == data.traces[0].events[1].location);
  }

  TEST_CASE("probabilities normalize over all traces") {
    std::istringstream locs("x1,0,0\nx2,1,0\nx3,2,0\n");
    const LocationTable table = parse_locations(locs);
    std::istringstream events("a,0,x1\na,1,x2\na,2,x3\nb,0,x2\nb,1,x2\nb,2,x1\n");
    const TraceDataset data = parse_traces(events, table, TimeSlotMap::identity(3));
    const SgdModel model = train_sgd(data, 0);
    double total = 0.0;
    for (const Trace& tr : oracle::enumerate_traces(3, 3))
      total += std::exp(sgd_log_probability(model, tr, data.traces[0], data.time));
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}
