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

#include "ppmtf/demo.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "ppmtf/rng.hpp"

namespace ppmtf {
namespace {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Morning and evening anchors per cluster, spread around the grid so
// cluster populations barely overlap.
struct ClusterAnchors {
  Point morning;
  Point evening;
};

std::vector<ClusterAnchors> place_anchors(const DemoSpec& spec) {
  std::vector<ClusterAnchors> anchors(spec.clusters);
  const double cx = (spec.grid_width - 1) / 2.0;
  const double cy = (spec.grid_height - 1) / 2.0;
  const double rx = 0.38 * spec.grid_width;
  const double ry = 0.38 * spec.grid_height;
  for (int c = 0; c < spec.clusters; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / spec.clusters;
    anchors[c].morning = {cx + rx * std::cos(angle), cy + ry * std::sin(angle)};
    // the evening anchor drifts within the same region so a cluster
    // stays one geographic pattern across slots
    const double shift = angle + std::numbers::pi / (4.0 * std::max(2, spec.clusters));
    anchors[c].evening = {cx + 0.78 * rx * std::cos(shift), cy + 0.78 * ry * std::sin(shift)};
  }
  return anchors;
}

class TargetField {
 public:
  TargetField(const DemoSpec& spec, const ClusterAnchors& anchors, Rng& user_rng)
      : spec_(spec) {
    // small personal offset keeps users in a cluster individually distinct
    offset_.x = 0.7 * (user_rng.uniform01() * 2.0 - 1.0);
    offset_.y = 0.7 * (user_rng.uniform01() * 2.0 - 1.0);
    const int slots = spec.instants / spec.instants_per_slot + (spec.instants % spec.instants_per_slot ? 1 : 0);
    weights_.resize(slots);

    auto bump = [&](const Point& center, double concentration) {
      Eigen::VectorXd dist(spec.grid_width * spec.grid_height);
      for (int row = 0; row < spec.grid_height; ++row)
        for (int col = 0; col < spec.grid_width; ++col) {
          const double d = std::hypot(col - center.x, row - center.y);
          dist(row * spec.grid_width + col) = std::exp(-concentration * d);
        }
      return Eigen::VectorXd(dist / dist.sum());
    };

    // personal anchor cell, drawn from a wide bump around the cluster's
    // morning center; like a home location it makes traces individually
    // identifiable while keeping the cluster geography
    const Eigen::VectorXd anchor_region = bump(anchors.morning, 0.65 * spec.concentration);
    int anchor_cell = 0;
    {
      const double u = user_rng.uniform01();
      double acc = 0.0;
      for (int i = 0; i < anchor_region.size(); ++i) {
        acc += anchor_region(i);
        if (u <= acc) {
          anchor_cell = i;
          break;
        }
      }
    }
    const Point anchor{static_cast<double>(anchor_cell % spec.grid_width),
                       static_cast<double>(anchor_cell / spec.grid_width)};
    const Eigen::VectorXd personal = bump(anchor, 3.0);

    for (int s = 0; s < slots; ++s) {
      const double w = slots > 1 ? static_cast<double>(s) / (slots - 1) : 0.0;
      const Point center{(1.0 - w) * anchors.morning.x + w * anchors.evening.x + offset_.x,
                         (1.0 - w) * anchors.morning.y + w * anchors.evening.y + offset_.y};
      // mornings are spent near the personal anchor, later slots follow
      // the cluster's drift
      const double personal_weight = 0.75 - 0.45 * w;
      weights_[s] = (1.0 - personal_weight) * bump(center, spec.concentration) +
                    personal_weight * personal;
    }
  }

  const Eigen::VectorXd& slot_target(int slot) const { return weights_[slot]; }

  int draw(int slot, Rng& rng) const {
    const Eigen::VectorXd& w = weights_[slot];
    const double u = rng.uniform01();
    double acc = 0.0;
    for (int i = 0; i < w.size(); ++i) {
      acc += w(i);
      if (u <= acc) return i;
    }
    return static_cast<int>(w.size()) - 1;
  }

  // local move: 3x3 neighborhood of `from`, weighted by the slot target
  int step(int slot, int from, Rng& rng) const {
    const Eigen::VectorXd& w = weights_[slot];
    const int col = from % spec_.grid_width;
    const int row = from / spec_.grid_width;
    double total = 0.0;
    int cells[9];
    double mass[9];
    int count = 0;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int r = row + dr;
        const int c = col + dc;
        if (r < 0 || r >= spec_.grid_height || c < 0 || c >= spec_.grid_width) continue;
        const int id = r * spec_.grid_width + c;
        cells[count] = id;
        mass[count] = w(id);
        total += mass[count];
        ++count;
      }
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    for (int i = 0; i < count; ++i) {
      acc += mass[i];
      if (u <= acc) return cells[i];
    }
    return cells[count - 1];
  }

 private:
  const DemoSpec& spec_;
  Point offset_;
  std::vector<Eigen::VectorXd> weights_;
};

Trace make_trace(const DemoSpec& spec, const TimeSlotMap& time, const TargetField& field, int user,
                 Rng& rng) {
  constexpr double kJumpProbability = 0.25;
  Trace full;
  full.user = user;
  int prev = field.draw(time.slot_of(0), rng);
  full.events.push_back({0, prev});
  for (int t = 1; t < spec.instants; ++t) {
    const int slot = time.slot_of(t);
    prev = rng.uniform01() < kJumpProbability ? field.draw(slot, rng) : field.step(slot, prev, rng);
    full.events.push_back({t, prev});
  }

  Trace out;
  out.user = user;
  for (const Event& e : full.events)
    if (rng.uniform01() >= spec.missing_rate) out.events.push_back(e);
  if (out.events.empty()) out.events.push_back(full.events.front());
  return out;
}

TraceDataset make_dataset(const DemoSpec& spec, const LocationTable& locations,
                          const TimeSlotMap& time, const std::vector<ClusterAnchors>& anchors,
                          int users, const char* prefix, std::uint64_t population_tag,
                          std::vector<int>& labels) {
  TraceDataset data;
  data.locations = locations;
  data.time = time;
  data.traces.resize(users);
  data.user_names.resize(users);
  labels.resize(users);
  for (int n = 0; n < users; ++n) {
    const int cluster = n % spec.clusters;
    labels[n] = cluster;
    data.user_names[n] = prefix + std::to_string(n);
    Rng rng = substream(spec.seed, RngTag::demo, population_tag, n);
    TargetField field(spec, anchors[cluster], rng);
    data.traces[n] = make_trace(spec, time, field, n, rng);
  }
  data.validate();
  return data;
}

}  // namespace

void DemoSpec::validate() const {
  if (train_users < 1 || test_users < 0) throw ConfigError("demo needs at least one training user");
  if (grid_width < 2 || grid_height < 2) throw ConfigError("demo grid too small");
  if (instants < 1 || instants_per_slot < 1) throw ConfigError("bad demo time parameters");
  if (clusters < 1 || clusters > train_users) throw ConfigError("bad demo cluster count");
  if (!(concentration > 0.0)) throw ConfigError("concentration must be positive");
  if (missing_rate < 0.0 || missing_rate >= 1.0) throw ConfigError("missing rate must be in [0, 1)");
}

DemoData generate_demo_data(const DemoSpec& spec) {
  spec.validate();

  LocationTable locations;
  locations.kind = LocationKind::grid;
  for (int row = 0; row < spec.grid_height; ++row)
    for (int col = 0; col < spec.grid_width; ++col) {
      locations.names.push_back("x" + std::to_string(row * spec.grid_width + col));
      locations.x.push_back(col);
      locations.y.push_back(row);
      locations.category.emplace_back();
    }

  const TimeSlotMap time = TimeSlotMap::contiguous(spec.instants, spec.instants_per_slot);
  const std::vector<ClusterAnchors> anchors = place_anchors(spec);

  DemoData demo;
  demo.train = make_dataset(spec, locations, time, anchors, spec.train_users, "u", 0,
                            demo.train_cluster);
  if (spec.test_users > 0)
    demo.test = make_dataset(spec, locations, time, anchors, spec.test_users, "v", 1,
                             demo.test_cluster);
  return demo;
}

}  // namespace ppmtf
