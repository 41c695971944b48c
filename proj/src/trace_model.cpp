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

#include "ppmtf/trace_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace ppmtf {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

long parse_long(const std::string& s, const char* what, int line_no) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

double parse_double(const std::string& s, const char* what, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

bool looks_like_header(const std::vector<std::string>& fields) {
  // A header is any first row whose numeric columns do not parse.
  for (std::size_t i = 1; i < fields.size(); ++i) {
    try {
      std::size_t pos = 0;
      (void)std::stod(fields[i], &pos);
      if (pos == fields[i].size()) return false;
    } catch (const std::exception&) {
    }
  }
  return !fields.empty();
}

}  // namespace

void LocationTable::validate() const {
  if (count() < 1) throw Error("location table must hold at least one location");
  if (x.size() != names.size() || y.size() != names.size() || category.size() != names.size())
    throw Error("location table columns disagree in length");
  if (kind == LocationKind::grid) {
    for (int i = 0; i < count(); ++i) {
      if (x[i] < 0 || y[i] < 0 || x[i] != std::floor(x[i]) || y[i] != std::floor(y[i]))
        throw Error("grid location " + names[i] + " has non-integer or negative coords");
    }
  }
}

TimeSlotMap::TimeSlotMap(int instant_count, std::vector<int> slot_of)
    : instant_count_(instant_count), slot_of_(std::move(slot_of)) {
  if (instant_count_ <= 0) throw ConfigError("instant count must be positive");
  if (static_cast<int>(slot_of_.size()) != instant_count_)
    throw ConfigError("slot map must cover every instant");
  int max_slot = -1;
  for (int s : slot_of_) {
    if (s < 0) throw ConfigError("negative slot index");
    max_slot = std::max(max_slot, s);
  }
  slot_count_ = max_slot + 1;
  std::vector<char> seen(slot_count_, 0);
  for (int s : slot_of_) seen[s] = 1;
  for (int s = 0; s < slot_count_; ++s)
    if (!seen[s]) throw ConfigError("slot " + std::to_string(s) + " has no instants");
}

TimeSlotMap TimeSlotMap::identity(int instant_count) {
  std::vector<int> m(instant_count);
  for (int t = 0; t < instant_count; ++t) m[t] = t;
  return TimeSlotMap(instant_count, std::move(m));
}

TimeSlotMap TimeSlotMap::contiguous(int instant_count, int instants_per_slot) {
  if (instants_per_slot <= 0) throw ConfigError("instants_per_slot must be positive");
  std::vector<int> m(instant_count);
  for (int t = 0; t < instant_count; ++t) m[t] = t / instants_per_slot;
  return TimeSlotMap(instant_count, std::move(m));
}

TimeSlotMap TimeSlotMap::cyclic_hours(int instant_count, int hours_per_slot) {
  if (hours_per_slot <= 0 || 24 % hours_per_slot != 0)
    throw ConfigError("hours_per_slot must divide 24");
  if (instant_count < 24)
    throw ConfigError("cyclic slotting needs at least one full day of instants");
  std::vector<int> m(instant_count);
  for (int t = 0; t < instant_count; ++t) m[t] = (t % 24) / hours_per_slot;
  return TimeSlotMap(instant_count, std::move(m));
}

int TimeSlotMap::slot_of(int t) const {
  if (t < 0 || t >= instant_count_)
    throw ContractError("instant " + std::to_string(t) + " outside [0, " +
                        std::to_string(instant_count_) + ")");
  return slot_of_[t];
}

bool Trace::gap_free() const {
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].instant != events[i - 1].instant + 1) return false;
  return true;
}

void TraceDataset::validate() const {
  locations.validate();
  if (static_cast<int>(user_names.size()) != users())
    throw Error("user dictionary and trace list disagree");
  for (int n = 0; n < users(); ++n) {
    const Trace& tr = traces[n];
    if (tr.user != n) throw Error("trace " + std::to_string(n) + " carries wrong user id");
    int prev = -1;
    for (const Event& e : tr.events) {
      if (e.instant <= prev)
        throw Error("trace of user " + user_names[n] + " has non-increasing instants");
      if (e.instant >= time.instant_count())
        throw Error("trace of user " + user_names[n] + " has instant out of range");
      if (e.location < 0 || e.location >= locations.count())
        throw Error("trace of user " + user_names[n] + " has location out of range");
      prev = e.instant;
    }
  }
}

LocationTable parse_locations(std::istream& in, LocationKind kind) {
  LocationTable table;
  table.kind = kind;
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto fields = split_csv(line);
    if (first && looks_like_header(fields)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 3)
      throw ParseError("line " + std::to_string(line_no) + ": want location,x,y[,category]");
    table.names.push_back(fields[0]);
    table.x.push_back(parse_double(fields[1], "x", line_no));
    table.y.push_back(parse_double(fields[2], "y", line_no));
    table.category.push_back(fields.size() > 3 ? fields[3] : std::string());
  }
  table.validate();
  return table;
}

TimeSlotMap parse_time_slots(std::istream& in, std::optional<int> fallback_instants) {
  std::string line;
  int line_no = 0;
  std::optional<int> instants = fallback_instants;
  std::vector<std::pair<int, int>> pairs;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (line.rfind("instants:", 0) == 0) {
      instants = static_cast<int>(parse_long(line.substr(9), "instant count", line_no));
      continue;
    }
    if (line.rfind("cycle:", 0) == 0) {
      if (!instants) throw ConfigError("cycle rule needs an instant count");
      const int h = static_cast<int>(parse_long(line.substr(6), "hours_per_slot", line_no));
      return TimeSlotMap::cyclic_hours(*instants, h);
    }
    if (line.rfind("contiguous:", 0) == 0) {
      if (!instants) throw ConfigError("contiguous rule needs an instant count");
      const int m = static_cast<int>(parse_long(line.substr(11), "instants_per_slot", line_no));
      return TimeSlotMap::contiguous(*instants, m);
    }
    auto fields = split_csv(line);
    if (fields.size() != 2)
      throw ParseError("line " + std::to_string(line_no) + ": want instant,slot");
    if (fields[0] == "instant") continue;  // header
    pairs.emplace_back(static_cast<int>(parse_long(fields[0], "instant", line_no)),
                       static_cast<int>(parse_long(fields[1], "slot", line_no)));
  }
  if (pairs.empty()) throw ParseError("empty time-slot config");
  int count = 0;
  for (auto& [t, s] : pairs) count = std::max(count, t + 1);
  std::vector<int> slot_of(count, -1);
  for (auto& [t, s] : pairs) {
    if (t < 0) throw ParseError("negative instant in time-slot config");
    if (slot_of[t] != -1) throw ParseError("instant " + std::to_string(t) + " mapped twice");
    slot_of[t] = s;
  }
  for (int t = 0; t < count; ++t)
    if (slot_of[t] == -1) throw ParseError("instant " + std::to_string(t) + " unmapped");
  return TimeSlotMap(count, std::move(slot_of));
}

TraceDataset parse_traces(std::istream& events, const LocationTable& locations,
                          const TimeSlotMap& time) {
  TraceDataset data;
  data.locations = locations;
  data.time = time;

  std::unordered_map<std::string, int> user_index;
  std::unordered_map<std::string, int> location_index;
  for (int i = 0; i < locations.count(); ++i) location_index.emplace(locations.names[i], i);

  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(events, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto fields = split_csv(line);
    if (first && looks_like_header(fields)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(line_no) + ": want user,instant,location");

    const std::string& user_name = fields[0];
    const int instant = static_cast<int>(parse_long(fields[1], "instant", line_no));
    auto loc_it = location_index.find(fields[2]);
    if (loc_it == location_index.end())
      throw ParseError("line " + std::to_string(line_no) + ": unknown location '" + fields[2] +
                       "'");
    if (instant < 0 || instant >= time.instant_count())
      throw ParseError("line " + std::to_string(line_no) + ": instant " +
                       std::to_string(instant) + " out of range");

    auto [it, inserted] = user_index.emplace(user_name, data.users());
    if (inserted) {
      data.user_names.push_back(user_name);
      data.traces.push_back(Trace{it->second, {}});
    }
    Trace& tr = data.traces[it->second];
    if (!tr.events.empty()) {
      const int prev = tr.events.back().instant;
      if (instant == prev)
        throw ParseError("line " + std::to_string(line_no) + ": duplicate (user, instant) pair");
      if (instant < prev)
        throw ParseError("line " + std::to_string(line_no) + ": non-monotone instants for user '" +
                         user_name + "'");
    }
    tr.events.push_back(Event{instant, loc_it->second});
  }
  data.validate();
  return data;
}

void write_traces(std::ostream& out, const TraceDataset& data) {
  out << "user,instant,location\n";
  for (const Trace& tr : data.traces)
    for (const Event& e : tr.events)
      out << data.user_names[tr.user] << ',' << e.instant << ','
          << data.locations.names[e.location] << '\n';
}

std::pair<std::string, std::optional<int>> split_replica(const std::string& user_field) {
  const auto pos = user_field.rfind('#');
  if (pos == std::string::npos) return {user_field, std::nullopt};
  try {
    std::size_t end = 0;
    const int rep = std::stoi(user_field.substr(pos + 1), &end);
    if (end != user_field.size() - pos - 1) return {user_field, std::nullopt};
    return {user_field.substr(0, pos), rep};
  } catch (const std::exception&) {
    return {user_field, std::nullopt};
  }
}

}  // namespace ppmtf
