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
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ppmtf {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries the line number.
struct ParseError : Error {
  using Error::Error;
};

/// Inconsistent or out-of-range configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// A caller violated a documented precondition.
struct ContractError : Error {
  using Error::Error;
};

/// Unrecoverable numerical failure (e.g. a posterior precision matrix
/// that stays indefinite after jitter).
struct NumericalError : Error {
  using Error::Error;
};

/// Caps the number of OpenMP threads used by parallel kernels.
/// `max_threads(1)` guarantees serial execution; results are identical
/// for any thread count because all random streams are keyed by index.
void set_max_threads(int threads);
int max_threads();

/// Runs f(0..n-1) across the configured threads. Exceptions thrown by
/// `f` are captured and rethrown on the calling thread after the loop.
template <class F>
void parallel_for(std::int64_t n, F&& f) {
  std::exception_ptr err = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(max_threads())
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(ppmtf_parallel_for_err)
#endif
      {
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace ppmtf
