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
#include <iosfwd>
#include <vector>

#include "ppmtf/trace_model.hpp"

namespace ppmtf {

enum class TensorKind { transition, visit };

/// Per-user sparse slices of a count tensor. `entries` hold the positive
/// counts; `observed_zeros` mark zero cells whose indicator is 1
/// (observed as zero). All other zero cells are missing.
struct SparseCountTensor {
  TensorKind kind = TensorKind::transition;
  int users = 0;
  int rows = 0;  // |X|
  int cols = 0;  // |X| for transitions, |L| for visits

  struct Cell {
    int i = 0;
    int j = 0;
    int count = 0;
  };
  std::vector<std::vector<Cell>> entries;                      // per user, count >= 1
  std::vector<std::vector<std::pair<int, int>>> observed_zeros;  // per user

  /// Max count cap applied by trim_and_truncate (0 = never truncated).
  int rmax = 0;

  std::int64_t total_positive_cells() const;
  void validate() const;
};

/// Trimming and observed-zero selection parameters. `lambda` caps the
/// positive cells per user, `rmax` caps each count, `rho` is the number
/// of observed zero cells drawn per user.
struct TrimConfig {
  int lambda_trans = 100;
  int lambda_visit = 100;
  int rmax_trans = 10;
  int rmax_visit = 10;
  int rho_trans = 1000;
  int rho_visit = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Counts transitions between events at adjacent instants (t, t+1); a
/// missing instant breaks the chain. Self transitions count like any
/// other. Returns the raw (untrimmed) tensor.
SparseCountTensor build_transition_tensor(const TraceDataset& data);

/// Counts, per user and location, events whose instant falls in each
/// time slot. Returns the raw (untrimmed) tensor.
SparseCountTensor build_visit_tensor(const TraceDataset& data);

/// Keeps at most `lambda` positive cells per user, chosen uniformly
/// without replacement, then truncates counts at `rmax`. Deterministic
/// given the seed: user n draws from substream (seed, trim, kind, n).
SparseCountTensor trim_and_truncate(SparseCountTensor tensor, int lambda, int rmax,
                                    std::uint64_t seed);

/// Draws exactly `rho` observed zero cells per user, uniformly over the
/// user's zero cells, via select / count collisions / reselect. The
/// tensor must already be trimmed. Throws ConfigError when a slice
/// cannot host `rho` zeros.
SparseCountTensor sample_zero_elements(SparseCountTensor tensor, int rho, std::uint64_t seed);

/// Builds both tensors and applies the full trim / truncate / zero
/// selection pipeline from the config.
struct TensorPair {
  SparseCountTensor trans;
  SparseCountTensor visit;
};
TensorPair build_count_tensors(const TraceDataset& data, const TrimConfig& cfg);

/// Debug/golden dump: dims header, `user,i,j,count` entry lines and a
/// `user,i,j` observed-zero section.
void write_tensor(std::ostream& out, const SparseCountTensor& tensor);
SparseCountTensor read_tensor(std::istream& in);

}  // namespace ppmtf
