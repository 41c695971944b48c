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

#include "ppmtf/pd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace ppmtf {
namespace {

// Absolute tolerance, in log units, for snapping to a bucket boundary.
constexpr double kLogBoundaryEps = 1e-12;

}  // namespace

void PDConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (subset_size < 1) throw ConfigError("subset size must be at least 1");
}

int bucket_index_log(double log_p, double eta) {
  if (!(eta > 0.0)) throw ContractError("eta must be positive");
  if (!(log_p <= 0.0) || !std::isfinite(log_p))
    throw ContractError("bucket index needs a probability in (0, 1]");
  const double x = -log_p / eta;
  const double nearest = std::round(x);
  long long i;
  if (std::abs(-log_p - nearest * eta) <= kLogBoundaryEps) {
    i = static_cast<long long>(nearest);  // p == e^{-i eta}: upper bound inclusive
  } else {
    i = static_cast<long long>(std::floor(x));
  }
  return static_cast<int>(std::max(0LL, i));
}

int bucket_index(double p, double eta) {
  if (!(p > 0.0) || !(p <= 1.0)) throw ContractError("bucket index needs p in (0, 1]");
  return bucket_index_log(std::log(p), eta);
}

std::vector<int> draw_user_subset(int users, int subset_size, Rng& rng) {
  if (users < 1) throw ContractError("need at least one user");
  subset_size = std::min(subset_size, users);
  std::vector<int> all(users);
  for (int i = 0; i < users; ++i) all[i] = i;
  // partial Fisher-Yates: the first subset_size entries are the draw
  for (int i = 0; i < subset_size; ++i) {
    const auto pick = i + rng.below(users - i);
    std::swap(all[i], all[pick]);
  }
  all.resize(subset_size);
  return all;
}

std::vector<int> draw_user_subset(int users, int subset_size, std::uint64_t seed) {
  Rng rng = substream(seed, RngTag::pd_subset);
  return draw_user_subset(users, subset_size, rng);
}

namespace {

// Membership of log_p in bucket i, with the same boundary snapping as
// bucket_index_log: -i*eta - eta < log_p <= -i*eta.
bool in_bucket(double log_p, int i, double eta) {
  if (!std::isfinite(log_p)) return false;
  const double upper = -static_cast<double>(i) * eta;
  const double lower = upper - eta;
  if (std::abs(log_p - upper) <= kLogBoundaryEps) return true;
  if (std::abs(log_p - lower) <= kLogBoundaryEps) return false;
  return log_p > lower && log_p < upper;
}

}  // namespace

PDResult run_pd_test_ordered(const std::function<double(int)>& log_prob, int input_user,
                             const std::vector<int>& subset, int k, double eta) {
  PDResult result;
  result.bucket = bucket_index_log(log_prob(input_user), eta);

  // the input user always occupies its own bucket
  result.count = 1;
  result.tested = 1;
  if (result.count >= k) {
    result.pass = true;
    return result;
  }
  for (int m : subset) {
    if (m == input_user) continue;
    ++result.tested;
    if (in_bucket(log_prob(m), result.bucket, eta)) ++result.count;
    if (result.count >= k) {
      result.pass = true;
      return result;
    }
  }
  result.pass = false;
  return result;
}

PDResult run_pd_test(const Trace& y, int input_user, int users,
                     const std::function<const MarkovGenerator&(int)>& generator_of,
                     const TimeSlotMap& time, const PDConfig& cfg, Rng& rng) {
  cfg.validate();
  if (input_user < 0 || input_user >= users) throw ContractError("input user out of range");
  const std::vector<int> subset = draw_user_subset(users, cfg.subset_size, rng);
  auto log_prob = [&](int m) { return trace_log_probability(generator_of(m), y, time); };
  return run_pd_test_ordered(log_prob, input_user, subset, cfg.k, cfg.eta);
}

std::vector<PDResult> run_pd_batch(
    int trace_count, const std::vector<int>& input_users, int users,
    const std::function<void(int user, std::vector<double>& out)>& eval_user,
    const PDConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(input_users.size()) != trace_count)
    throw ContractError("one input user per trace required");
  const std::vector<int> subset = draw_user_subset(users, cfg.subset_size, cfg.seed);

  // users whose probabilities are needed: U* plus every input user
  std::unordered_set<int> needed(subset.begin(), subset.end());
  for (int n : input_users) {
    if (n < 0 || n >= users) throw ContractError("input user out of range");
    needed.insert(n);
  }
  std::vector<int> needed_list(needed.begin(), needed.end());
  std::sort(needed_list.begin(), needed_list.end());

  std::vector<std::vector<double>> log_prob(needed_list.size());
  parallel_for(static_cast<std::int64_t>(needed_list.size()), [&](std::int64_t idx) {
    log_prob[idx].assign(trace_count, 0.0);
    eval_user(needed_list[idx], log_prob[idx]);
  });

  std::unordered_map<int, int> column_of;
  for (std::size_t i = 0; i < needed_list.size(); ++i) column_of.emplace(needed_list[i], i);

  std::vector<PDResult> results(trace_count);
  for (int t = 0; t < trace_count; ++t) {
    auto lp = [&](int m) { return log_prob[column_of.at(m)][t]; };
    results[t] = run_pd_test_ordered(lp, input_users[t], subset, cfg.k, cfg.eta);
  }
  return results;
}

double pd_pass_rate(const std::vector<PDResult>& results) {
  if (results.empty()) throw ContractError("pass rate of an empty result list");
  std::int64_t passes = 0;
  for (const PDResult& r : results) passes += r.pass ? 1 : 0;
  return static_cast<double>(passes) / static_cast<double>(results.size());
}

}  // namespace ppmtf
