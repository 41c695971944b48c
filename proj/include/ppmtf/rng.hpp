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

#include <cmath>
#include <cstdint>
#include <random>

namespace ppmtf {

/// Stream tags keeping independent parts of the pipeline on independent
/// random substreams. A substream is fully determined by
/// (seed, tag, indices...), so parallel loops stay reproducible.
enum class RngTag : std::uint64_t {
  trim = 1,
  zero_sample = 2,
  factor_init = 3,
  gibbs_hyper = 4,
  gibbs_row = 5,
  synthesis = 6,
  pd_subset = 7,
  demo = 8,
  baseline = 9,
  retrain = 10,
  report = 11,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Hash-combines a seed with one stream component.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t component) {
  return detail::splitmix64(seed ^ (component * 0xd1b54a32d192ed03ULL));
}

template <class... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t component, Rest... rest) {
  return mix_seed(mix_seed(seed, component), static_cast<std::uint64_t>(rest)...);
}

/// Random generator with the handful of draws the pipeline needs.
/// Every draw routine is stateless apart from the underlying engine, so
/// consuming code can reason exactly about how many variates are used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform01_open_low() { return 1.0 - uniform01(); }

  /// Uniform integer in [0, n).
  std::int64_t below(std::int64_t n) {
    // rejection to avoid modulo bias
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::int64_t>(x % un);
  }

  /// Standard normal via Box-Muller (no cached second variate, so each
  /// call consumes exactly two uniforms).
  double normal() {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang, with the boost for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform01_open_low();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01_open_low();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

 private:
  std::mt19937_64 engine_;
};

/// Builds the substream for (seed, tag, indices...).
template <class... Indices>
Rng substream(std::uint64_t seed, RngTag tag, Indices... indices) {
  return Rng(mix_seed(seed, static_cast<std::uint64_t>(tag), static_cast<std::uint64_t>(indices)...));
}

}  // namespace ppmtf
