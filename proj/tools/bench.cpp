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

// Times the OpenMP kernels against their serial reference
// implementations on a synthetic workload.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>

#include "ppmtf/demo.hpp"
#include "ppmtf/generator.hpp"
#include "ppmtf/pipeline.hpp"
#include "ppmtf/serial_ref.hpp"

using namespace ppmtf;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmark: serial reference vs OpenMP"};
  int users = 300;
  int grid = 14;
  int repeats = 3;
  int threads = 0;
  app.add_option("--users", users, "Training users");
  app.add_option("--grid", grid, "Grid side (locations = grid^2)");
  app.add_option("--repeats", repeats, "Timing repeats");
  app.add_option("--threads", threads, "Parallel thread cap (0 = OpenMP default)");
  CLI11_PARSE(app, argc, argv);

  DemoSpec spec;
  spec.train_users = users;
  spec.test_users = 0;
  spec.grid_width = grid;
  spec.grid_height = grid;
  const DemoData demo = generate_demo_data(spec);

  TrimConfig trim;
  trim.rho_trans = 400;
  trim.rho_visit = 150;
  const TensorPair tensors = build_count_tensors(demo.train, trim);
  const ObservedCells trans_cells = ObservedCells::from(tensors.trans);
  const ObservedCells visit_cells = ObservedCells::from(tensors.visit);

  GibbsConfig cfg;
  cfg.iterations = 1;
  cfg.burn_in = 0;
  FactorMatrices theta = init_factors(demo.train.users(), demo.train.locations.count(),
                                      demo.train.time.slot_count(), cfg.factors, 7);
  const HyperPriors priors = HyperPriors::defaults(cfg.factors);
  Rng hyper_rng(11);
  const NormalWishart hp = sample_hyperparams(theta.A, priors, hyper_rng);

#ifdef _OPENMP
  std::printf("parallel kernels use up to %d thread(s)\n",
              threads > 0 ? threads : omp_get_max_threads());
#endif
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial ref", "omp kernel", "speedup");

  {
    auto serial_fn = [&] {
      set_max_threads(1);
      for (int n = 0; n < demo.train.users(); ++n)
        (void)serial::row_posterior(FactorId::a, n, &trans_cells, &visit_cells, theta, hp,
                                    cfg.alpha);
    };
    auto parallel_fn = [&] {
      set_max_threads(threads);
      sample_factor_rows(FactorId::a, &trans_cells, &visit_cells, theta, hp, cfg.alpha, 7, 1);
    };
    report("gibbs row conditionals (A)", time_ms(serial_fn, repeats),
           time_ms(parallel_fn, repeats));
  }

  {
    auto serial_fn = [&] {
      for (int n = 0; n < 8; ++n) (void)serial::reconstruct_transition_slice(theta, n);
    };
    auto parallel_fn = [&] {
      for (int n = 0; n < 8; ++n) (void)reconstruct_transition_slice(theta, n);
    };
    report("user slice reconstruction", time_ms(serial_fn, repeats),
           time_ms(parallel_fn, repeats));
  }

  {
    const MarkovGenerator gen = build_generator(theta, 0, demo.train.time, 1e-8);
    const Eigen::VectorXd pi = gen.pi[0];
    auto serial_fn = [&] { (void)serial::mh_adjust(gen.q_star, pi); };
    auto parallel_fn = [&] { (void)mh_adjust(gen.q_star, pi); };
    report("MH adjustment", time_ms(serial_fn, repeats), time_ms(parallel_fn, repeats));
  }

  {
    auto serial_fn = [&] {
      set_max_threads(1);
      (void)build_count_tensors(demo.train, trim);
    };
    auto parallel_fn = [&] {
      set_max_threads(threads);
      (void)build_count_tensors(demo.train, trim);
    };
    report("tensor counting+trim", time_ms(serial_fn, repeats), time_ms(parallel_fn, repeats));
  }

  {
    SynthesisConfig synth;
    synth.replicas = 1;
    auto serial_fn = [&] {
      set_max_threads(1);
      (void)synthesize_dataset(theta, theta, demo.train, synth, nullptr);
    };
    auto parallel_fn = [&] {
      set_max_threads(threads);
      (void)synthesize_dataset(theta, theta, demo.train, synth, nullptr);
    };
    report("generator build + synth", time_ms(serial_fn, repeats), time_ms(parallel_fn, repeats));
  }

  set_max_threads(0);
  return 0;
}
