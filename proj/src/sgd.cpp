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

#include "ppmtf/sgd.hpp"

#include <cmath>
#include <limits>

#include "ppmtf/generator.hpp"

namespace ppmtf {
namespace {

int draw_from(const Eigen::VectorXd& dist, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  const int n = static_cast<int>(dist.size());
  for (int i = 0; i < n; ++i) {
    acc += dist(i);
    if (u <= acc) return i;
  }
  return n - 1;
}

}  // namespace

SgdModel train_sgd(const TraceDataset& data, int xi, double floor) {
  if (xi < 0) throw ConfigError("xi must be non-negative");
  const int locations = data.locations.count();
  const int slots = data.time.slot_count();

  SgdModel model;
  model.xi = xi;
  Eigen::VectorXd first_counts = Eigen::VectorXd::Zero(locations);
  std::vector<Eigen::MatrixXd> counts(slots, Eigen::MatrixXd::Zero(locations, locations));

  for (const Trace& tr : data.traces) {
    for (std::size_t e = 0; e < tr.events.size(); ++e) {
      const Event& cur = tr.events[e];
      if (cur.instant == 0) first_counts(cur.location) += 1.0;
      if (e > 0 && tr.events[e - 1].instant + 1 == cur.instant)
        counts[data.time.slot_of(cur.instant)](tr.events[e - 1].location, cur.location) += 1.0;
    }
  }

  model.q.reserve(slots);
  for (int s = 0; s < slots; ++s) {
    Eigen::MatrixXd q = counts[s];
    for (int a = 0; a < locations; ++a) {
      const double row_sum = q.row(a).sum();
      if (row_sum > 0.0)
        q.row(a) /= row_sum;
      else
        q.row(a).setConstant(1.0 / locations);
    }
    model.q.push_back(normalize_rows_with_floor(std::move(q), floor));
  }

  const double first_total = first_counts.sum();
  if (first_total > 0.0)
    first_counts /= first_total;
  else
    first_counts.setConstant(1.0 / locations);
  model.pi_first = normalize_with_floor(std::move(first_counts), floor);
  return model;
}

Trace sgd_synthesize(const SgdModel& model, const Trace& input, const TimeSlotMap& time,
                     int length, Rng& rng) {
  if (length <= 0 || length > time.instant_count())
    throw ContractError("trace length outside [1, instant count]");
  if (model.xi > time.instant_count()) throw ContractError("xi exceeds the instant count");

  Trace out;
  out.user = input.user;
  out.events.reserve(length);

  // events of the input trace at copyable instants
  std::vector<int> copied(std::min(model.xi, length), -1);
  for (const Event& e : input.events)
    if (e.instant < static_cast<int>(copied.size())) copied[e.instant] = e.location;

  int prev = -1;
  for (int t = 0; t < length; ++t) {
    int loc;
    if (t < static_cast<int>(copied.size()) && copied[t] >= 0) {
      loc = copied[t];
    } else if (prev < 0) {
      loc = draw_from(model.pi_first, rng);
    } else {
      loc = draw_from(model.q[time.slot_of(t)].row(prev).transpose(), rng);
    }
    out.events.push_back({t, loc});
    prev = loc;
  }
  return out;
}

double sgd_log_probability(const SgdModel& model, const Trace& y, const Trace& input_of_m,
                           const TimeSlotMap& time) {
  if (y.events.empty()) throw ContractError("empty trace has no probability");
  if (!y.gap_free()) throw ContractError("trace probability needs a gap-free trace");

  std::vector<int> copied(model.xi, -1);
  for (const Event& e : input_of_m.events)
    if (e.instant < model.xi) copied[e.instant] = e.location;

  double log_p = 0.0;
  int prev = -1;
  for (const Event& e : y.events) {
    const bool copy_instant = e.instant < model.xi && copied[e.instant] >= 0;
    if (copy_instant) {
      if (copied[e.instant] != e.location) return -std::numeric_limits<double>::infinity();
    } else if (prev < 0) {
      log_p += std::log(model.pi_first(e.location));
    } else {
      log_p += std::log(model.q[time.slot_of(e.instant)](prev, e.location));
    }
    prev = e.location;
  }
  return log_p;
}

}  // namespace ppmtf
