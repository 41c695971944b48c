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

#include <map>
#include <sstream>

#include "ppmtf/rng.hpp"
#include "ppmtf/trace_model.hpp"

using namespace ppmtf;

namespace {

LocationTable five_locations() {
  std::istringstream locs("x1,0,0\nx2,1,0\nx3,2,0\nx4,3,0\nx5,4,0\n");
  return parse_locations(locs);
}

// The three-user, five-location, nine-instant example world: slots
// group instants {0,1,2}, {3,4,5}, {6,7,8}.
TraceDataset example_world() {
  const LocationTable locs = five_locations();
  const TimeSlotMap time = TimeSlotMap::contiguous(9, 3);
  std::istringstream events(
      "user,instant,location\n"
      "u1,0,x2\nu1,1,x3\nu1,2,x4\nu1,4,x3\nu1,5,x4\nu1,6,x5\nu1,8,x5\n"
      "u2,0,x1\nu2,1,x1\nu2,2,x2\nu2,3,x2\nu2,5,x3\nu2,6,x4\nu2,7,x4\nu2,8,x5\n"
      "u3,1,x5\nu3,2,x4\nu3,3,x4\nu3,4,x3\nu3,5,x2\nu3,6,x2\nu3,7,x1\nu3,8,x1\n");
  return parse_traces(events, locs, time);
}

}  // namespace

TEST_SUITE("trace_model") {
  TEST_CASE("first example trace has seven events with two gaps") {
    const TraceDataset data = example_world();
    REQUIRE(data.users() == 3);
    const Trace& s1 = data.traces[0];
    CHECK(s1.events.size() == 7);
    // events at instants 0,1,2,4,5,6,8: instants 3 and 7 are missing
    std::vector<int> instants;
    for (const Event& e : s1.events) instants.push_back(e.instant);
    CHECK(instants == std::vector<int>{0, 1, 2, 4, 5, 6, 8});
    CHECK_FALSE(s1.gap_free());
  }

  TEST_CASE("empty event file parses to zero users") {
    const LocationTable locs = five_locations();
    std::istringstream events("");
    const TraceDataset data = parse_traces(events, locs, TimeSlotMap::identity(4));
    CHECK(data.users() == 0);
  }

  TEST_CASE("temporally separated fragments concatenate into one trace") {
    const LocationTable locs = five_locations();
    std::istringstream events("a,1,x1\na,2,x2\nb,0,x1\na,5,x3\na,6,x4\n");
    const TraceDataset data = parse_traces(events, locs, TimeSlotMap::identity(8));
    REQUIRE(data.users() == 2);
    CHECK(data.traces[0].events.size() == 4);
    CHECK(data.traces[0].events[2].instant == 5);
  }

  TEST_CASE("parse errors carry line numbers") {
    const LocationTable locs = five_locations();
    const TimeSlotMap time = TimeSlotMap::identity(4);
    SUBCASE("duplicate user-instant pair") {
      std::istringstream events("a,1,x1\na,1,x2\n");
      CHECK_THROWS_WITH_AS(parse_traces(events, locs, time),
                           doctest::Contains("line 2"), ParseError);
    }
    SUBCASE("non-monotone instants") {
      std::istringstream events("a,2,x1\na,1,x2\n");
      CHECK_THROWS_WITH_AS(parse_traces(events, locs, time),
                           doctest::Contains("non-monotone"), ParseError);
    }
    SUBCASE("instant out of range") {
      std::istringstream events("a,9,x1\n");
      CHECK_THROWS_AS(parse_traces(events, locs, time), ParseError);
    }
    SUBCASE("unknown location") {
      std::istringstream events("a,1,nowhere\n");
      CHECK_THROWS_AS(parse_traces(events, locs, time), ParseError);
    }
  }

  TEST_CASE("slot_of matches the configured map") {
    SUBCASE("contiguous example slots") {
      const TimeSlotMap time = TimeSlotMap::contiguous(9, 3);
      CHECK(time.slot_of(4) == 1);  // fifth instant sits in the second slot
      CHECK(time.slot_count() == 3);
    }
    SUBCASE("identity slotting") {
      const TimeSlotMap time = TimeSlotMap::identity(6);
      CHECK(time.slot_of(3) == 3);
      CHECK(time.slot_count() == 6);
    }
    SUBCASE("two-hour cyclic slots") {
      const TimeSlotMap time = TimeSlotMap::cyclic_hours(48, 2);
      CHECK(time.slot_count() == 12);
      CHECK(time.slot_of(25) == 0);  // hour 25 wraps into the 0-2h slot
      CHECK(time.slot_of(23) == 11);
    }
    SUBCASE("out of range throws") {
      const TimeSlotMap time = TimeSlotMap::identity(4);
      CHECK_THROWS_AS(time.slot_of(4), ContractError);
      CHECK_THROWS_AS(time.slot_of(-1), ContractError);
    }
  }

  TEST_CASE("slot preimages partition the instants") {
    const TimeSlotMap time = TimeSlotMap::contiguous(11, 4);
    std::vector<int> hits(time.slot_count(), 0);
    for (int t = 0; t < time.instant_count(); ++t) ++hits[time.slot_of(t)];
    int total = 0;
    for (int h : hits) {
      CHECK(h > 0);
      total += h;
    }
    CHECK(total == time.instant_count());
  }

  TEST_CASE("empty slots are rejected") {
    CHECK_THROWS_AS(TimeSlotMap(4, {0, 0, 2, 2}), ConfigError);
  }

  TEST_CASE("serialize then parse preserves the event multiset") {
    const TraceDataset data = example_world();
    std::ostringstream out;
    write_traces(out, data);
    std::istringstream in(out.str());
    const TraceDataset round = parse_traces(in, data.locations, data.time);

    auto multiset = [](const TraceDataset& d) {
      std::map<std::tuple<std::string, int, int>, int> events;
      for (const Trace& tr : d.traces)
        for (const Event& e : tr.events) ++events[{d.user_names[tr.user], e.instant, e.location}];
      return events;
    };
    CHECK(multiset(data) == multiset(round));
  }

  TEST_CASE("dataset validation rejects out-of-range events") {
    TraceDataset data = example_world();
    data.traces[1].events.push_back({100, 0});
    CHECK_THROWS_AS(data.validate(), Error);

    TraceDataset data2 = example_world();
    data2.traces[0].events[0].location = 99;
    CHECK_THROWS_AS(data2.validate(), Error);
  }

  TEST_CASE("time-slot config parsing") {
    SUBCASE("explicit pairs") {
      std::istringstream cfg("instant,slot\n0,0\n1,0\n2,1\n3,1\n");
      const TimeSlotMap time = parse_time_slots(cfg);
      CHECK(time.instant_count() == 4);
      CHECK(time.slot_of(2) == 1);
    }
    SUBCASE("separated instants share a slot") {
      std::istringstream cfg("0,0\n1,1\n2,0\n3,1\n");
      const TimeSlotMap time = parse_time_slots(cfg);
      CHECK(time.slot_count() == 2);
      CHECK(time.slot_of(0) == time.slot_of(2));
    }
    SUBCASE("cycle rule") {
      std::istringstream cfg("instants:48\ncycle:2\n");
      const TimeSlotMap time = parse_time_slots(cfg);
      CHECK(time.slot_count() == 12);
    }
    SUBCASE("contiguous rule with fallback count") {
      std::istringstream cfg("contiguous:3\n");
      const TimeSlotMap time = parse_time_slots(cfg, 9);
      CHECK(time.slot_count() == 3);
    }
    SUBCASE("unmapped instant") {
      std::istringstream cfg("0,0\n2,1\n");
      CHECK_THROWS_AS(parse_time_slots(cfg), ParseError);
    }
  }

  TEST_CASE("replica suffix splitting") {
    CHECK(split_replica("u42#3") == std::pair<std::string, std::optional<int>>{"u42", 3});
    CHECK(split_replica("u42") == std::pair<std::string, std::optional<int>>{"u42", std::nullopt});
    CHECK(split_replica("a#b").second == std::nullopt);
  }
}
