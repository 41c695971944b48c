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

#include "ppmtf/common.hpp"

#include <atomic>

namespace ppmtf {
namespace {
std::atomic<int> g_max_threads{0};  // 0 = OpenMP default
}

void set_max_threads(int threads) { g_max_threads.store(threads > 0 ? threads : 0); }

int max_threads() {
  const int configured = g_max_threads.load();
#ifdef _OPENMP
  return configured > 0 ? configured : omp_get_max_threads();
#else
  return configured > 0 ? configured : 1;
#endif
}

}  // namespace ppmtf
