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

#include "ppmtf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ppmtf/rng.hpp"

namespace ppmtf {
namespace {

constexpr int kFractionBins = 24;

// Per-slot location frequency distributions; slots with no events are
// uniform.
std::vector<Eigen::VectorXd> slot_distributions(const TraceDataset& data) {
  const int slots = data.time.slot_count();
  const int locations = data.locations.count();
  std::vector<Eigen::VectorXd> dist(slots, Eigen::VectorXd::Zero(locations));
  for (const Trace& tr : data.traces)
    for (const Event& e : tr.events) dist[data.time.slot_of(e.instant)](e.location) += 1.0;
  for (int s = 0; s < slots; ++s) {
    const double total = dist[s].sum();
    if (total > 0.0)
      dist[s] /= total;
    else
      dist[s].setConstant(1.0 / locations);
  }
  return dist;
}

// Pooled transition counts over all users and instants.
Eigen::MatrixXd pooled_transition_counts(const TraceDataset& data) {
  const int locations = data.locations.count();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(locations, locations);
  for (const Trace& tr : data.traces)
    for (std::size_t e = 1; e < tr.events.size(); ++e)
      if (tr.events[e - 1].instant + 1 == tr.events[e].instant)
        counts(tr.events[e - 1].location, tr.events[e].location) += 1.0;
  return counts;
}

struct AxisBins {
  std::vector<int> bin_of;  // per location
  int bins = 0;
};

AxisBins axis_bins(const LocationTable& locations, bool x_axis, int poi_bins) {
  const std::vector<double>& coord = x_axis ? locations.x : locations.y;
  AxisBins out;
  out.bin_of.resize(coord.size());
  if (locations.kind == LocationKind::grid) {
    int max_bin = 0;
    for (std::size_t i = 0; i < coord.size(); ++i) {
      out.bin_of[i] = static_cast<int>(coord[i]);
      max_bin = std::max(max_bin, out.bin_of[i]);
    }
    out.bins = max_bin + 1;
    return out;
  }
  const auto [lo_it, hi_it] = std::minmax_element(coord.begin(), coord.end());
  const double lo = *lo_it;
  const double span = std::max(*hi_it - lo, 1e-12);
  out.bins = poi_bins;
  for (std::size_t i = 0; i < coord.size(); ++i) {
    const int b = static_cast<int>((coord[i] - lo) / span * poi_bins);
    out.bin_of[i] = std::min(b, poi_bins - 1);
  }
  return out;
}

std::vector<double> marginalize_row(const Eigen::VectorXd& row, const AxisBins& bins) {
  std::vector<double> out(bins.bins, 0.0);
  for (int j = 0; j < row.size(); ++j) out[bins.bin_of[j]] += row(j);
  return out;
}

// bin index in [0, 24) for a visit fraction c/total in (0, 1]; exact in
// integer arithmetic, fraction 1 lands in the last bin
int fraction_bin(std::int64_t count, std::int64_t total) {
  const std::int64_t b = (kFractionBins * count + total - 1) / total;  // ceil
  return static_cast<int>(std::min<std::int64_t>(b, kFractionBins)) - 1;
}

}  // namespace

double tp_tv(const TraceDataset& test, const TraceDataset& synth, std::optional<int> top_k) {
  if (test.locations.count() != synth.locations.count() ||
      test.time.slot_count() != synth.time.slot_count())
    throw ContractError("tp_tv needs matching location and slot counts");

  const auto p = slot_distributions(test);
  const auto q = slot_distributions(synth);
  const int slots = static_cast<int>(p.size());
  const int locations = test.locations.count();

  double total = 0.0;
  for (int s = 0; s < slots; ++s) {
    double tv = 0.0;
    if (top_k) {
      std::vector<int> order(locations);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return p[s](a) > p[s](b); });
      const int keep = std::min(*top_k, locations);
      for (int r = 0; r < keep; ++r) tv += std::abs(p[s](order[r]) - q[s](order[r]));
    } else {
      tv = (p[s] - q[s]).cwiseAbs().sum();
    }
    total += 0.5 * tv;
  }
  return total / slots;
}

double emd_1d(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ContractError("emd_1d needs equal bin counts");
  double cdf_diff = 0.0;
  double emd = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    cdf_diff += p[i] - q[i];
    emd += std::abs(cdf_diff);
  }
  return emd;
}

TmEmdResult tm_emd(const TraceDataset& test, const TraceDataset& synth, int poi_bins) {
  if (test.locations.count() != synth.locations.count())
    throw ContractError("tm_emd needs matching location counts");

  const Eigen::MatrixXd test_counts = pooled_transition_counts(test);
  const Eigen::MatrixXd synth_counts = pooled_transition_counts(synth);
  const AxisBins xb = axis_bins(test.locations, true, poi_bins);
  const AxisBins yb = axis_bins(test.locations, false, poi_bins);

  TmEmdResult result;
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (int a = 0; a < test_counts.rows(); ++a) {
    const double test_mass = test_counts.row(a).sum();
    if (test_mass <= 0.0) continue;  // no testing evidence for this row
    const double synth_mass = synth_counts.row(a).sum();
    if (synth_mass <= 0.0) {
      ++result.rows_skipped;
      continue;
    }
    const Eigen::VectorXd p = test_counts.row(a).transpose() / test_mass;
    const Eigen::VectorXd q = synth_counts.row(a).transpose() / synth_mass;
    sum_x += emd_1d(marginalize_row(p, xb), marginalize_row(q, xb));
    sum_y += emd_1d(marginalize_row(p, yb), marginalize_row(q, yb));
    ++result.rows_used;
  }
  if (result.rows_used > 0) {
    result.emd_x = sum_x / result.rows_used;
    result.emd_y = sum_y / result.rows_used;
  }
  return result;
}

double vf_tv(const TraceDataset& test, const TraceDataset& synth, int min_events) {
  if (test.locations.count() != synth.locations.count())
    throw ContractError("vf_tv needs matching location counts");
  const int locations = test.locations.count();

  // histograms[x](b) = number of qualifying traces whose visit fraction
  // at x falls in bin b
  auto histograms = [&](const TraceDataset& data) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(locations, kFractionBins);
    for (const Trace& tr : data.traces) {
      const std::int64_t total = static_cast<std::int64_t>(tr.events.size());
      if (total < min_events) continue;
      std::vector<std::pair<int, std::int64_t>> counts;
      for (const Event& e : tr.events) {
        bool found = false;
        for (auto& [loc, c] : counts)
          if (loc == e.location) {
            ++c;
            found = true;
          }
        if (!found) counts.emplace_back(e.location, 1);
      }
      for (const auto& [loc, c] : counts) h(loc, fraction_bin(c, total)) += 1.0;
    }
    return h;
  };

  const Eigen::MatrixXd test_h = histograms(test);
  const Eigen::MatrixXd synth_h = histograms(synth);

  double total_tv = 0.0;
  int used = 0;
  for (int x = 0; x < locations; ++x) {
    const double test_mass = test_h.row(x).sum();
    if (test_mass <= 0.0) continue;  // averaged over testing-visited locations
    const double synth_mass = synth_h.row(x).sum();
    const Eigen::VectorXd p = test_h.row(x).transpose() / test_mass;
    const Eigen::VectorXd q = synth_mass > 0.0
                                  ? Eigen::VectorXd(synth_h.row(x).transpose() / synth_mass)
                                  : Eigen::VectorXd(Eigen::VectorXd::Zero(kFractionBins));
    total_tv += 0.5 * (p - q).cwiseAbs().sum();
    ++used;
  }
  if (used == 0) throw ContractError("no qualifying testing trace for vf_tv");
  return total_tv / used;
}

std::vector<int> extract_cluster(const Eigen::MatrixXd& a, int column, double fraction) {
  if (column < 0 || column >= a.cols()) throw ContractError("column out of range");
  if (!(fraction > 0.0) || fraction > 1.0) throw ContractError("fraction must be in (0, 1]");
  const int users = static_cast<int>(a.rows());
  const int keep = std::min(users, static_cast<int>(std::ceil(fraction * users)));
  std::vector<int> order(users);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int u, int v) { return a(u, column) > a(v, column); });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

TraceDataset uniform_baseline(int users, const LocationTable& locations, const TimeSlotMap& time,
                              std::uint64_t seed) {
  TraceDataset data;
  data.locations = locations;
  data.time = time;
  data.traces.resize(users);
  data.user_names.resize(users);
  for (int n = 0; n < users; ++n) {
    data.user_names[n] = "uniform" + std::to_string(n);
    Rng rng = substream(seed, RngTag::baseline, n);
    Trace& tr = data.traces[n];
    tr.user = n;
    tr.events.reserve(time.instant_count());
    for (int t = 0; t < time.instant_count(); ++t)
      tr.events.push_back({t, static_cast<int>(rng.below(locations.count()))});
  }
  return data;
}

TraceDataset training_baseline(const TraceDataset& data) { return data; }

UtilityReport evaluate_utility(const TraceDataset& test, const TraceDataset& synth, int top_k,
                               int poi_bins) {
  UtilityReport report;
  report.tp_tv = tp_tv(test, synth);
  report.tp_tv_top50 = tp_tv(test, synth, top_k);
  const TmEmdResult emd = tm_emd(test, synth, poi_bins);
  report.tm_emd_x = emd.emd_x;
  report.tm_emd_y = emd.emd_y;
  report.vf_tv = vf_tv(test, synth);
  return report;
}

}  // namespace ppmtf
