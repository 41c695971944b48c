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

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ppmtf/common.hpp"

namespace ppmtf {

enum class LocationKind { grid, poi };

/// The discretized location universe. Externally locations are named
/// strings; internally they are dense 0-based ids in file order.
/// Coordinates are integer grid indices for `grid` data and
/// longitude/latitude for `poi` data.
struct LocationTable {
  LocationKind kind = LocationKind::grid;
  std::vector<std::string> names;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> category;  // empty string when absent

  int count() const { return static_cast<int>(names.size()); }
  void validate() const;
};

/// Total map from time instants to time slots. Slot indices must cover
/// [0, slot_count) with no empty slot.
class TimeSlotMap {
 public:
  TimeSlotMap() = default;
  TimeSlotMap(int instant_count, std::vector<int> slot_of);

  /// One slot per instant.
  static TimeSlotMap identity(int instant_count);
  /// Consecutive blocks of `instants_per_slot` instants share a slot.
  static TimeSlotMap contiguous(int instant_count, int instants_per_slot);
  /// One-hour instants assigned to 24h-cyclic slots of `hours_per_slot`
  /// hours; slot(t) = (t mod 24) / hours_per_slot.
  static TimeSlotMap cyclic_hours(int instant_count, int hours_per_slot);

  int instant_count() const { return instant_count_; }
  int slot_count() const { return slot_count_; }

  /// The instant -> slot function; throws ContractError when t is out of
  /// range.
  int slot_of(int t) const;

 private:
  int instant_count_ = 0;
  int slot_count_ = 0;
  std::vector<int> slot_of_;
};

/// One observation: user was at `location` at time instant `instant`.
struct Event {
  int instant = 0;
  int location = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// A single user's trace: events ordered by strictly increasing instant.
/// Instants missing from the list are missing events.
struct Trace {
  int user = 0;
  std::vector<Event> events;

  /// True when the events cover a contiguous instant range with no gap.
  bool gap_free() const;
};

/// A full dataset: one trace per user, user ids dense in [0, users).
struct TraceDataset {
  LocationTable locations;
  TimeSlotMap time;
  std::vector<Trace> traces;
  std::vector<std::string> user_names;  // sidecar dictionary, index order

  int users() const { return static_cast<int>(traces.size()); }

  /// Checks all structural invariants; throws Error on violation.
  void validate() const;
};

/// Reads a location CSV (`location,x,y[,category]`, optional header).
LocationTable parse_locations(std::istream& in, LocationKind kind = LocationKind::grid);

/// Reads a time-slot config: either `instant,slot` lines covering every
/// instant, or a rule line `cycle:<hours_per_slot>` /
/// `contiguous:<instants_per_slot>` (rules need `fallback_instants`, or
/// an explicit `instants:<n>` line before the rule).
TimeSlotMap parse_time_slots(std::istream& in, std::optional<int> fallback_instants = {});

/// Reads an event CSV (`user,instant,location`, optional header) and
/// assembles the validated dataset. Temporally separated fragments of
/// one user concatenate into a single trace; gaps stay missing.
/// Duplicate (user, instant) pairs, out-of-range fields, and
/// non-monotone instants raise ParseError naming the line.
TraceDataset parse_traces(std::istream& events, const LocationTable& locations,
                          const TimeSlotMap& time);

/// Writes the dataset back in event CSV form (with header). Synthetic
/// replicas keep their `name#replica` user field.
void write_traces(std::ostream& out, const TraceDataset& data);

/// Splits a synthetic user field `name#replica`; replica is empty for
/// plain names.
std::pair<std::string, std::optional<int>> split_replica(const std::string& user_field);

}  // namespace ppmtf
