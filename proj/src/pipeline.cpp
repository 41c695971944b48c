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

#include "ppmtf/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <unordered_map>

#include "ppmtf/generator.hpp"
#include "ppmtf/io.hpp"

namespace ppmtf {
namespace {

// One trace per (user, replica), synthesized from a per-trace substream.
struct RawSynthesis {
  std::vector<Trace> traces;
  std::vector<int> input_user;
  std::vector<int> replica;
};

template <class SynthesizeUser>
RawSynthesis synthesize_raw(int users, int replicas, SynthesizeUser&& synthesize_user) {
  RawSynthesis raw;
  raw.traces.resize(static_cast<std::size_t>(users) * replicas);
  raw.input_user.resize(raw.traces.size());
  raw.replica.resize(raw.traces.size());
  parallel_for(users, [&](std::int64_t n) {
    synthesize_user(static_cast<int>(n), [&](int r, Trace trace) {
      const std::size_t idx = static_cast<std::size_t>(n) * replicas + r;
      raw.traces[idx] = std::move(trace);
      raw.input_user[idx] = static_cast<int>(n);
      raw.replica[idx] = r;
    });
  });
  return raw;
}

SynthesisResult split_by_pd(RawSynthesis raw, const TraceDataset& train,
                            const std::vector<PDResult>& pd) {
  SynthesisResult out;
  out.pd_results = pd;
  auto init = [&](TraceDataset& d) {
    d.locations = train.locations;
    d.time = train.time;
  };
  init(out.released);
  init(out.quarantined);
  for (std::size_t t = 0; t < raw.traces.size(); ++t) {
    const bool pass = pd.empty() || pd[t].pass;
    TraceDataset& target = pass ? out.released : out.quarantined;
    std::vector<int>& users = pass ? out.released_input_user : out.quarantined_input_user;
    Trace trace = std::move(raw.traces[t]);
    trace.user = target.users();
    target.user_names.push_back(train.user_names[raw.input_user[t]] + "#" +
                                std::to_string(raw.replica[t]));
    target.traces.push_back(std::move(trace));
    users.push_back(raw.input_user[t]);
  }
  return out;
}

}  // namespace

void SynthesisConfig::validate() const {
  if (!(phi > 0.0)) throw ConfigError("phi must be positive");
  if (replicas < 1) throw ConfigError("need at least one replica per user");
  if (length < 0) throw ConfigError("length must be non-negative");
}

SynthesisResult synthesize_dataset(const FactorMatrices& theta, const FactorMatrices& visit_theta,
                                   const TraceDataset& train, const SynthesisConfig& cfg,
                                   const PDConfig* pd) {
  cfg.validate();
  const int length = cfg.length > 0 ? cfg.length : train.time.instant_count();

  RawSynthesis raw = synthesize_raw(train.users(), cfg.replicas, [&](int n, auto&& emit) {
    const MarkovGenerator gen = build_generator(theta, visit_theta, n, train.time, cfg.phi);
    for (int r = 0; r < cfg.replicas; ++r) {
      Rng rng = substream(cfg.seed, RngTag::synthesis, n, r);
      emit(r, synthesize_trace(gen, train.time, length, rng));
    }
  });

  std::vector<PDResult> pd_results;
  if (pd) {
    pd_results = run_pd_batch(
        static_cast<int>(raw.traces.size()), raw.input_user, train.users(),
        [&](int user, std::vector<double>& out) {
          const MarkovGenerator gen = build_generator(theta, visit_theta, user, train.time,
                                                      cfg.phi);
          for (std::size_t t = 0; t < raw.traces.size(); ++t)
            out[t] = trace_log_probability(gen, raw.traces[t], train.time);
        },
        *pd);
  }
  return split_by_pd(std::move(raw), train, pd_results);
}

SynthesisResult sgd_synthesize_dataset(const SgdModel& model, const TraceDataset& train,
                                       const SynthesisConfig& cfg, const PDConfig* pd) {
  cfg.validate();
  const int length = cfg.length > 0 ? cfg.length : train.time.instant_count();

  RawSynthesis raw = synthesize_raw(train.users(), cfg.replicas, [&](int n, auto&& emit) {
    for (int r = 0; r < cfg.replicas; ++r) {
      Rng rng = substream(cfg.seed, RngTag::synthesis, n, r);
      emit(r, sgd_synthesize(model, train.traces[n], train.time, length, rng));
    }
  });

  std::vector<PDResult> pd_results;
  if (pd) {
    pd_results = run_pd_batch(
        static_cast<int>(raw.traces.size()), raw.input_user, train.users(),
        [&](int user, std::vector<double>& out) {
          for (std::size_t t = 0; t < raw.traces.size(); ++t)
            out[t] = sgd_log_probability(model, raw.traces[t], train.traces[user], train.time);
        },
        *pd);
  }
  return split_by_pd(std::move(raw), train, pd_results);
}

std::vector<PDResult> pd_test_dataset(const FactorMatrices& theta,
                                      const FactorMatrices& visit_theta,
                                      const TraceDataset& train, const TraceDataset& synthetic,
                                      const std::vector<int>& input_users, double phi,
                                      const PDConfig& cfg) {
  return run_pd_batch(
      synthetic.users(), input_users, train.users(),
      [&](int user, std::vector<double>& out) {
        const MarkovGenerator gen = build_generator(theta, visit_theta, user, train.time, phi);
        for (int t = 0; t < synthetic.users(); ++t)
          out[t] = trace_log_probability(gen, synthetic.traces[t], train.time);
      },
      cfg);
}

std::vector<int> input_users_from_names(const TraceDataset& synthetic,
                                        const TraceDataset& train) {
  std::unordered_map<std::string, int> index;
  for (int n = 0; n < train.users(); ++n) index.emplace(train.user_names[n], n);
  std::vector<int> input_users;
  input_users.reserve(synthetic.users());
  for (const std::string& name : synthetic.user_names) {
    const auto [base, replica] = split_replica(name);
    const auto it = index.find(base);
    if (it == index.end()) throw ParseError("synthetic user '" + name + "' has no training user");
    input_users.push_back(it->second);
  }
  return input_users;
}

AttackSummary run_attacks(const TraceDataset& train, const TraceDataset& test,
                          const TraceDataset& synthetic, const std::vector<int>& input_users) {
  if (static_cast<int>(input_users.size()) != synthetic.users())
    throw ContractError("one input user per synthetic trace required");

  std::vector<Trace> known = train.traces;
  known.insert(known.end(), test.traces.begin(), test.traces.end());
  for (std::size_t n = 0; n < known.size(); ++n) known[n].user = static_cast<int>(n);
  const AttackModel model = build_attack_model(known, train.locations.count());

  AttackSummary summary;

  std::vector<std::pair<int, int>> assignments;
  std::vector<int> predicted(synthetic.users(), -1);
  parallel_for(synthetic.users(), [&](std::int64_t t) {
    const Trace& y = synthetic.traces[t];
    bool any = false;
    for (std::size_t e = 1; e < y.events.size(); ++e)
      if (y.events[e - 1].instant + 1 == y.events[e].instant) any = true;
    if (any) predicted[t] = reidentify(y, model, train.users());
  });
  for (int t = 0; t < synthetic.users(); ++t) {
    if (predicted[t] < 0) {
      ++summary.reid_skipped;
      continue;
    }
    assignments.emplace_back(predicted[t], input_users[t]);
  }
  if (!assignments.empty()) summary.reid_rate = reid_rate(assignments);
  summary.reid_traces = static_cast<int>(assignments.size());

  MembershipConfig membership;
  for (int n = 0; n < train.users(); ++n) membership.members.push_back(n);
  for (int n = 0; n < test.users(); ++n) membership.nonmembers.push_back(train.users() + n);
  summary.membership = membership_advantage(synthetic.traces, model, membership);
  return summary;
}

UtilityReport run_demo_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const DemoData demo = generate_demo_data(cfg.demo);
  write_traces_file(out_dir / "train_events.csv", demo.train);
  write_traces_file(out_dir / "test_events.csv", demo.test);
  write_locations_file(out_dir / "locations.csv", demo.train.locations);
  write_time_slots_file(out_dir / "timeslots.csv", demo.train.time);
  {
    std::ofstream labels(out_dir / "cluster_labels.csv");
    labels << "user,cluster\n";
    for (int n = 0; n < demo.train.users(); ++n)
      labels << demo.train.user_names[n] << ',' << demo.train_cluster[n] << '\n';
  }

  const TensorPair tensors = build_count_tensors(demo.train, cfg.trim);
  write_tensor_file(out_dir / "tensor_I.csv", tensors.trans);
  write_tensor_file(out_dir / "tensor_II.csv", tensors.visit);

  const HyperPriors priors = HyperPriors::defaults(cfg.gibbs.factors);
  const GibbsResult trained = gibbs_train(tensors, priors, cfg.gibbs);
  write_factors(out_dir / "factors", trained, cfg.gibbs, priors);

  const FactorMatrices& theta = trained.theta;
  const FactorMatrices& visit_theta = trained.visit_theta ? *trained.visit_theta : trained.theta;
  const SynthesisResult synth =
      synthesize_dataset(theta, visit_theta, demo.train, cfg.synthesis,
                         cfg.pd_gate ? &cfg.pd : nullptr);
  write_traces_file(out_dir / "syn_traces.csv", synth.released);
  if (cfg.pd_gate) {
    write_traces_file(out_dir / "quarantine.csv", synth.quarantined);
    std::ofstream pd_report(out_dir / "pd_report.csv");
    pd_report << "trace_id,input_user,bucket,k_found,pass\n";
    int released_idx = 0;
    int quarantined_idx = 0;
    for (std::size_t t = 0; t < synth.pd_results.size(); ++t) {
      const PDResult& r = synth.pd_results[t];
      const std::string& name = r.pass ? synth.released.user_names[released_idx++]
                                       : synth.quarantined.user_names[quarantined_idx++];
      const int input = r.pass ? synth.released_input_user[released_idx - 1]
                               : synth.quarantined_input_user[quarantined_idx - 1];
      pd_report << name << ',' << input << ',' << r.bucket << ',' << r.count << ','
                << (r.pass ? 1 : 0) << '\n';
    }
  }

  UtilityReport report;
  if (synth.released.users() > 0) report = evaluate_utility(demo.test, synth.released);
  {
    std::ofstream util(out_dir / "utility_report.csv");
    util << std::setprecision(17);
    util << "metric,value\n"
         << "tp_tv," << report.tp_tv << '\n'
         << "tp_tv_top50," << report.tp_tv_top50 << '\n'
         << "tm_emd_x," << report.tm_emd_x << '\n'
         << "tm_emd_y," << report.tm_emd_y << '\n'
         << "vf_tv," << report.vf_tv << '\n';
  }

  if (cfg.gibbs.mode == GibbsMode::shared) {
    // the privacy budget applies to the coupled model only
    const double kappa = compute_kappa(theta, tensors.trans.rmax, tensors.visit.rmax).kappa;
    std::ofstream dp(out_dir / "dp_report.txt");
    dp << std::setprecision(17);
    dp << "kappa " << kappa << '\n'
       << "epsilon_trace "
       << epsilon_trace(cfg.gibbs.alpha, cfg.trim.lambda_trans, cfg.trim.rho_trans,
                        cfg.trim.rmax_trans, cfg.trim.lambda_visit, cfg.trim.rho_visit,
                        cfg.trim.rmax_visit, kappa)
       << '\n'
       << "epsilon_single_location "
       << epsilon_single_location(cfg.gibbs.alpha, cfg.trim.rmax_trans, cfg.trim.rmax_visit,
                                  kappa)
       << '\n'
       << "memory_bytes "
       << estimate_memory_bytes(demo.train.users(), demo.train.locations.count(),
                                demo.train.time.slot_count(), cfg.trim, cfg.gibbs.factors)
       << '\n';
  }
  return report;
}

}  // namespace ppmtf
