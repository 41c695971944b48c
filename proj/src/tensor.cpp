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

#include "ppmtf/tensor.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "ppmtf/rng.hpp"

namespace ppmtf {
namespace {

// Accumulates one user's (i, j) counts in sorted cell order.
std::vector<SparseCountTensor::Cell> to_cells(const std::map<std::pair<int, int>, int>& counts) {
  std::vector<SparseCountTensor::Cell> cells;
  cells.reserve(counts.size());
  for (const auto& [ij, c] : counts) cells.push_back({ij.first, ij.second, c});
  return cells;
}

}  // namespace

std::int64_t SparseCountTensor::total_positive_cells() const {
  std::int64_t total = 0;
  for (const auto& user_cells : entries) total += static_cast<std::int64_t>(user_cells.size());
  return total;
}

void SparseCountTensor::validate() const {
  if (static_cast<int>(entries.size()) != users ||
      static_cast<int>(observed_zeros.size()) != users)
    throw Error("tensor per-user lists disagree with user count");
  for (int n = 0; n < users; ++n) {
    std::unordered_set<std::int64_t> seen;
    for (const Cell& c : entries[n]) {
      if (c.count < 1) throw Error("non-positive stored count");
      if (c.i < 0 || c.i >= rows || c.j < 0 || c.j >= cols) throw Error("cell out of range");
      if (!seen.insert(static_cast<std::int64_t>(c.i) * cols + c.j).second)
        throw Error("duplicate cell");
    }
    for (const auto& [i, j] : observed_zeros[n]) {
      if (i < 0 || i >= rows || j < 0 || j >= cols) throw Error("observed zero out of range");
      if (!seen.insert(static_cast<std::int64_t>(i) * cols + j).second)
        throw Error("observed zero collides with an entry");
    }
  }
}

void TrimConfig::validate() const {
  if (lambda_trans <= 0 || lambda_visit <= 0 || rmax_trans <= 0 || rmax_visit <= 0 ||
      rho_trans <= 0 || rho_visit <= 0)
    throw ConfigError("trim parameters must be positive");
}

SparseCountTensor build_transition_tensor(const TraceDataset& data) {
  SparseCountTensor t;
  t.kind = TensorKind::transition;
  t.users = data.users();
  t.rows = data.locations.count();
  t.cols = data.locations.count();
  t.entries.resize(t.users);
  t.observed_zeros.resize(t.users);

  parallel_for(t.users, [&](std::int64_t n) {
    std::map<std::pair<int, int>, int> counts;
    const auto& events = data.traces[n].events;
    for (std::size_t e = 1; e < events.size(); ++e)
      if (events[e].instant == events[e - 1].instant + 1)
        ++counts[{events[e - 1].location, events[e].location}];
    t.entries[n] = to_cells(counts);
  });
  return t;
}

SparseCountTensor build_visit_tensor(const TraceDataset& data) {
  SparseCountTensor t;
  t.kind = TensorKind::visit;
  t.users = data.users();
  t.rows = data.locations.count();
  t.cols = data.time.slot_count();
  t.entries.resize(t.users);
  t.observed_zeros.resize(t.users);

  parallel_for(t.users, [&](std::int64_t n) {
    std::map<std::pair<int, int>, int> counts;
    for (const Event& e : data.traces[n].events)
      ++counts[{e.location, data.time.slot_of(e.instant)}];
    t.entries[n] = to_cells(counts);
  });
  return t;
}

SparseCountTensor trim_and_truncate(SparseCountTensor tensor, int lambda, int rmax,
                                    std::uint64_t seed) {
  if (lambda <= 0 || rmax <= 0) throw ConfigError("lambda and rmax must be positive");
  tensor.rmax = rmax;
  const auto kind_tag = static_cast<std::uint64_t>(tensor.kind);
  parallel_for(tensor.users, [&](std::int64_t n) {
    auto& cells = tensor.entries[n];
    if (static_cast<int>(cells.size()) > lambda) {
      // partial Fisher-Yates: move lambda uniform picks to the front
      Rng rng = substream(seed, RngTag::trim, kind_tag, n);
      for (int k = 0; k < lambda; ++k) {
        const auto pick = k + rng.below(static_cast<std::int64_t>(cells.size()) - k);
        std::swap(cells[k], cells[pick]);
      }
      cells.resize(lambda);
      std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
        return std::pair(a.i, a.j) < std::pair(b.i, b.j);
      });
    }
    for (auto& c : cells) c.count = std::min(c.count, rmax);
  });
  return tensor;
}

SparseCountTensor sample_zero_elements(SparseCountTensor tensor, int rho, std::uint64_t seed) {
  if (rho <= 0) throw ConfigError("rho must be positive");
  const std::int64_t slice_cells = static_cast<std::int64_t>(tensor.rows) * tensor.cols;
  const auto kind_tag = static_cast<std::uint64_t>(tensor.kind);

  parallel_for(tensor.users, [&](std::int64_t n) {
    const auto& cells = tensor.entries[n];
    const std::int64_t positives = static_cast<std::int64_t>(cells.size());
    if (positives + rho > slice_cells)
      throw ConfigError("user slice too small to host " + std::to_string(rho) +
                        " observed zeros");

    std::unordered_set<std::int64_t> positive_keys;
    positive_keys.reserve(cells.size() * 2);
    for (const auto& c : cells)
      positive_keys.insert(static_cast<std::int64_t>(c.i) * tensor.cols + c.j);

    Rng rng = substream(seed, RngTag::zero_sample, kind_tag, n);

    // (i) draw rho distinct cells from the whole slice
    std::unordered_set<std::int64_t> selected;
    selected.reserve(rho * 2);
    while (static_cast<int>(selected.size()) < rho) selected.insert(rng.below(slice_cells));

    // (ii) count selected cells that landed on positives
    std::int64_t collisions = 0;
    for (std::int64_t key : selected)
      if (positive_keys.count(key)) ++collisions;

    // (iii) replace them with zero cells not drawn before
    for (std::int64_t k = 0; k < collisions; ++k) {
      std::int64_t key;
      do {
        key = rng.below(slice_cells);
      } while (positive_keys.count(key) || selected.count(key));
      selected.insert(key);
    }

    auto& zeros = tensor.observed_zeros[n];
    zeros.clear();
    zeros.reserve(rho);
    for (std::int64_t key : selected)
      if (!positive_keys.count(key))
        zeros.emplace_back(static_cast<int>(key / tensor.cols),
                           static_cast<int>(key % tensor.cols));
    std::sort(zeros.begin(), zeros.end());
  });
  return tensor;
}

TensorPair build_count_tensors(const TraceDataset& data, const TrimConfig& cfg) {
  cfg.validate();
  TensorPair pair;
  pair.trans = sample_zero_elements(
      trim_and_truncate(build_transition_tensor(data), cfg.lambda_trans, cfg.rmax_trans, cfg.seed),
      cfg.rho_trans, cfg.seed);
  pair.visit = sample_zero_elements(
      trim_and_truncate(build_visit_tensor(data), cfg.lambda_visit, cfg.rmax_visit, cfg.seed),
      cfg.rho_visit, cfg.seed);
  return pair;
}

void write_tensor(std::ostream& out, const SparseCountTensor& tensor) {
  out << "# dims\n"
      << (tensor.kind == TensorKind::transition ? "transition" : "visit") << ',' << tensor.users
      << ',' << tensor.rows << ',' << tensor.cols << ',' << tensor.rmax << '\n';
  out << "# entries\n";
  for (int n = 0; n < tensor.users; ++n)
    for (const auto& c : tensor.entries[n])
      out << n << ',' << c.i << ',' << c.j << ',' << c.count << '\n';
  out << "# observed_zeros\n";
  for (int n = 0; n < tensor.users; ++n)
    for (const auto& [i, j] : tensor.observed_zeros[n]) out << n << ',' << i << ',' << j << '\n';
}

SparseCountTensor read_tensor(std::istream& in) {
  SparseCountTensor tensor;
  std::string line;
  int section = 0;  // 0 = expect dims header, 1 = dims, 2 = entries, 3 = zeros
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line == "# dims") {
      section = 1;
      continue;
    }
    if (line == "# entries") {
      section = 2;
      continue;
    }
    if (line == "# observed_zeros") {
      section = 3;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    try {
      if (section == 1) {
        if (fields.size() != 5) throw Error("want kind,users,rows,cols,rmax");
        tensor.kind = fields[0] == "transition" ? TensorKind::transition : TensorKind::visit;
        tensor.users = std::stoi(fields[1]);
        tensor.rows = std::stoi(fields[2]);
        tensor.cols = std::stoi(fields[3]);
        tensor.rmax = std::stoi(fields[4]);
        tensor.entries.assign(tensor.users, {});
        tensor.observed_zeros.assign(tensor.users, {});
      } else if (section == 2) {
        if (fields.size() != 4) throw Error("want user,i,j,count");
        tensor.entries.at(std::stoi(fields[0]))
            .push_back({std::stoi(fields[1]), std::stoi(fields[2]), std::stoi(fields[3])});
      } else if (section == 3) {
        if (fields.size() != 3) throw Error("want user,i,j");
        tensor.observed_zeros.at(std::stoi(fields[0]))
            .emplace_back(std::stoi(fields[1]), std::stoi(fields[2]));
      } else {
        throw Error("content before # dims");
      }
    } catch (const std::exception& e) {
      throw ParseError("tensor dump line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  tensor.validate();
  return tensor;
}

}  // namespace ppmtf
