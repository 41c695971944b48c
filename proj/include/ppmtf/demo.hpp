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

#include <cstdint>
#include <vector>

#include "ppmtf/trace_model.hpp"

namespace ppmtf {

/// Synthetic benchmark world: users partitioned into clusters, each
/// cluster anchored at two grid centers (morning and evening) with a
/// slot-interpolated target distribution; traces mix local moves with
/// affinity-weighted jumps, and events drop out i.i.d.
struct DemoSpec {
  int train_users = 200;
  int test_users = 200;
  int grid_width = 10;
  int grid_height = 10;  // location id = row * width + column
  int instants = 24;
  int instants_per_slot = 4;
  int clusters = 4;
  double concentration = 1.2;  // larger = tighter clusters
  double missing_rate = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct DemoData {
  TraceDataset train;
  TraceDataset test;
  std::vector<int> train_cluster;  // planted label per training user
  std::vector<int> test_cluster;
};

/// Deterministic given the spec seed. Every trace keeps at least one
/// event regardless of the missing rate.
DemoData generate_demo_data(const DemoSpec& spec);

}  // namespace ppmtf
