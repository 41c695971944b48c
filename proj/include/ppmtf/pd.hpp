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
#include <functional>
#include <vector>

#include "ppmtf/generator.hpp"
#include "ppmtf/trace_model.hpp"

namespace ppmtf {

/// Plausible-deniability test parameters: a synthetic trace passes when
/// at least k users' generation probabilities land in the same
/// log-width-eta bucket as the input user's.
struct PDConfig {
  int k = 10;
  double eta = 1.0;
  int subset_size = 32000;  // |U*|, clamped to the user count
  std::uint64_t seed = 1;

  void validate() const;
};

struct PDResult {
  bool pass = false;
  int bucket = 0;  // i
  int count = 0;   // k' at exit
  int tested = 0;  // users examined before exiting
};

/// Bucket index i >= 0 with e^{-(i+1) eta} < p <= e^{-i eta}. Computed in
/// log domain; boundaries within 1e-12 (absolute, log scale) of an exact
/// bucket edge snap to that edge.
int bucket_index(double p, double eta);
int bucket_index_log(double log_p, double eta);

/// The fixed random test subset U*: `subset_size` distinct users drawn
/// once from (seed, subset) and reused for a whole run.
std::vector<int> draw_user_subset(int users, int subset_size, std::uint64_t seed);
std::vector<int> draw_user_subset(int users, int subset_size, Rng& rng);

/// Core counting loop: computes the input user's bucket, then walks the
/// input user followed by `subset` in order, incrementing k' for every
/// user whose log-probability falls in the bucket, and returns pass the
/// moment k' reaches k. `log_prob(m)` is evaluated lazily.
PDResult run_pd_test_ordered(const std::function<double(int)>& log_prob, int input_user,
                             const std::vector<int>& subset, int k, double eta);

/// Single-trace test against per-user generators; the subset is drawn
/// from `rng` here (batch runs should draw it once instead).
PDResult run_pd_test(const Trace& y, int input_user, int users,
                     const std::function<const MarkovGenerator&(int)>& generator_of,
                     const TimeSlotMap& time, const PDConfig& cfg, Rng& rng);

/// Batch variant: `eval_user(m, out)` fills log p(y_t = M(m)) for every
/// trace t. Users are evaluated in parallel; the per-trace counting then
/// runs in the same fixed order as the single-trace test, so results
/// match it exactly.
std::vector<PDResult> run_pd_batch(
    int trace_count, const std::vector<int>& input_users, int users,
    const std::function<void(int user, std::vector<double>& out)>& eval_user,
    const PDConfig& cfg);

/// passes / total; throws ContractError on an empty list.
double pd_pass_rate(const std::vector<PDResult>& results);

}  // namespace ppmtf
